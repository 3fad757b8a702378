import math

import numpy as np
import pytest

from eperson.agent import FirstPersonAgent
from eperson.hierarchy import ContextBinding, HierarchicalAgent, ascend, descend, mix_bindings, step_hierarchical
from eperson.model import GenerativeModel, ModelError, Policy, identity_transitions
from eperson.perception import Belief
from eperson.prob import entropy
from eperson.scenarios import tmaze


def _result(post):
    class R:
        posterior = Belief((np.asarray(post, float),))

    return R()


def test_descend_examples():
    c0, c1 = np.log([0.7, 0.3]), np.log([0.2, 0.8])
    b = [ContextBinding(np.array([1.0, 0.0]), c0), ContextBinding(np.array([0.0, 1.0]), c1)]
    d, c = mix_bindings([1.0, 0.0], b)
    assert np.allclose(d, [1, 0]) and np.allclose(c, c0, atol=1e-12)
    d, c = mix_bindings([0.5, 0.5], b)
    assert np.allclose(d, [0.5, 0.5], atol=1e-15)
    assert np.allclose(np.exp(c), [0.45, 0.55], atol=1e-12)
    same = [b[0], b[0]]
    for w in ([0.1, 0.9], [0.6, 0.4]):
        d, c = mix_bindings(w, same)
        assert np.allclose(d, [1, 0]) and np.allclose(c, c0, atol=1e-12)
    with pytest.raises(ModelError):
        mix_bindings([1.0], b)


def test_ascend_examples():
    assert ascend(None, _result(np.eye(5)[3])) == 3
    assert ascend(None, _result([0.6, 0.4])) == 0
    assert ascend(None, _result([0.5, 0.5])) == 0


def _trace(agent, env, seed, steps=3):
    rng = np.random.default_rng(seed)
    agent.reset()
    env.reset(rng)
    rows = []
    for _ in range(steps):
        dec = agent.decide(rng)
        obs, _ = env.step([dec.control])
        res = agent.observe(obs[0], dec.control)
        rows.append((dec.control, res.posterior.self_factor.copy(), res.free_energy,
                     tuple(e.efe for e in dec.plan.evaluations)))
    return rows


def test_single_context_matches_flat_agent():
    hier = tmaze.hierarchical_agent(contexts=1)
    flat = FirstPersonAgent(tmaze.lower_model(), name="rat")
    for ctx in (0, 1):
        a = _trace(hier, tmaze.TMazeEnv(ctx), 0)
        b = _trace(flat, tmaze.TMazeEnv(ctx), 0)
        for (ua, qa, fa, ga), (ub, qb, fb, gb) in zip(a, b):
            assert ua == ub
            assert np.allclose(qa, qb, atol=1e-10)
            assert fa == pytest.approx(fb, abs=1e-10)
            assert np.allclose(ga, gb, atol=1e-10)


def test_uninformative_channel_keeps_high_prior():
    low = tmaze.lower_model()
    high = GenerativeModel(np.full((low.num_states, 2), 1.0 / low.num_states), identity_transitions(2),
                           np.zeros(low.num_states), (np.array([0.3, 0.7]),), (Policy((0,)),))
    c = tmaze.preferences()
    agent = HierarchicalAgent(high, low, [ContextBinding(tmaze.context_prior(np.eye(2)[k]), c) for k in range(2)])
    env = tmaze.TMazeEnv(0)
    rng = np.random.default_rng(1)
    env.reset(rng)
    for _ in range(4):
        u = agent.decide(rng).control
        obs, _ = env.step([u])
        step_hierarchical(agent, obs[0], u)
        assert np.allclose(agent.high_belief.self_factor, [0.3, 0.7], atol=1e-12)


def test_context_is_learned_and_entropy_bounded():
    for ctx in (0, 1):
        agent = tmaze.hierarchical_agent()
        env = tmaze.TMazeEnv(ctx)
        rng = np.random.default_rng(ctx)
        env.reset(rng)
        entropies = [entropy(agent.high_belief.self_factor)]
        for _ in range(3):
            u = agent.decide(rng).control
            obs, _ = env.step([u])
            agent.observe(obs[0], u)
            h = entropy(agent.high_belief.self_factor)
            assert h <= math.log(2) + 1e-12
            entropies.append(h)
        assert entropies[-1] < entropies[0]
        assert int(np.argmax(agent.high_belief.self_factor)) == ctx
        d, _ = descend(agent)
        assert d.sum() == pytest.approx(1.0, abs=1e-12)


def test_binding_validation():
    low = tmaze.lower_model()
    high = GenerativeModel(np.full((low.num_states, 2), 0.125), identity_transitions(2), np.zeros(8),
                           (np.array([0.5, 0.5]),), (Policy((0,)),))
    with pytest.raises(ModelError):
        HierarchicalAgent(high, low, [ContextBinding(np.ones(8) / 8, tmaze.preferences())])
    with pytest.raises(ModelError):
        HierarchicalAgent(high, low, [ContextBinding(np.ones(3) / 3, tmaze.preferences())] * 2)
