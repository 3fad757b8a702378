"""Coupled agents: second-person (bidirectional) and third-person (shared
context) machinery.

An agent's model is conditioned on the joint configuration of its own state,
its belief about the other's state and, optionally, a shared context state.
Agents never read each other's internals; the other is reached only through
observations and through a model of the other (``other_model``) that the
agent uses to predict the other's choices.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .agent import DETERMINISTIC, Decision, FirstPersonAgent, choose
from .model import GenerativeModel, ModelError, OTHER, SELF, SHARED, propagate, validate
from .perception import Belief, InferenceResult, infer_state
from .planning import (
    DEFAULT_PRECISION,
    Plan,
    PolicyEvaluation,
    control_marginal,
    evaluate_policies,
    policy_posterior,
    select_action,
)

STATIC, PREDICT = "static", "predict"


def _logsumexp(x: np.ndarray) -> float:
    m = np.max(x)
    return float(m + np.log(np.sum(np.exp(x - m))))


class CoupledAgent:
    """Agent whose observation model spans (self, other[, shared]) factors.

    ``coupling`` selects how the other factor evolves between rounds:
    ``"predict"`` pushes it through the other's transitions weighted by the
    controls the agent expects the other to choose; ``"static"`` keeps it.
    """

    kind = "coupled"

    def __init__(self, model: GenerativeModel, other_model: GenerativeModel | None = None, w: float = 0.0,
                 precision: float = DEFAULT_PRECISION, action_mode: str = DETERMINISTIC,
                 coupling: str = PREDICT, name: str = "agent"):
        kinds = [f.kind for f in model.factors]
        if kinds[:2] != [SELF, OTHER] or kinds[2:] not in ([], [SHARED]):
            raise ModelError(f"coupled model factors must be (self, other[, shared]), got {kinds}")
        if not 0.0 <= w <= 1.0:
            raise ModelError(f"social weight w={w} outside [0, 1]")
        if coupling not in (STATIC, PREDICT):
            raise ModelError(f"unknown coupling mode {coupling!r}")
        validate(model).raise_if_failed("coupled model")
        other_model = model if other_model is None else other_model
        validate(other_model).raise_if_failed("other-agent model")
        if [f.kind for f in other_model.factors] != kinds:
            raise ModelError("other-agent model must use the same factor layout")
        if other_model.factor_sizes[1] != model.factor_sizes[0] or other_model.factor_sizes[0] != model.factor_sizes[1]:
            raise ModelError("other-agent model must swap the self and other factor sizes")
        self.model = model
        self.other_model = other_model
        self.w = float(w)
        self.precision = precision
        self.action_mode = action_mode
        self.coupling = coupling
        self.name = name
        self.reset()

    @property
    def shared_index(self) -> int | None:
        return self.model.factor_index(SHARED)

    def reset(self):
        self.belief = Belief.prior_of(self.model)
        n_other = self.model.factor_sizes[1]
        self.other_transition = np.eye(n_other)
        self.last_result: InferenceResult | None = None
        self.last_efe_self = 0.0
        self.last_efe_other = 0.0

    def set_shared(self, broadcast) -> None:
        """Clamp the shared factor to a broadcast context distribution."""
        k = self.shared_index
        if k is None:
            raise ModelError("agent has no shared factor")
        broadcast = np.asarray(broadcast, dtype=np.float64)
        if broadcast.shape != (self.model.factor_sizes[k],):
            raise ModelError("broadcast does not match the shared factor")
        self.belief = self.belief.with_factor(k, broadcast)

    def presumed_other_belief(self, self_as_seen=None) -> Belief:
        """The other's belief as this agent imagines it.

        The other's self factor is this agent's belief about the other; the
        other's view of this agent is ``self_as_seen`` (defaults to this
        agent's own self belief).
        """
        f = self.belief.factors
        mine = f[0] if self_as_seen is None else np.asarray(self_as_seen, dtype=np.float64)
        return Belief((f[1], mine) + tuple(f[2:]), tuple(x.kind for x in self.other_model.factors))

    def coupling_transition(self) -> np.ndarray:
        if self.coupling == STATIC:
            return np.eye(self.model.factor_sizes[1])
        evals = simulate_other(self)
        post = policy_posterior(evals, self.precision)
        marginal = select_action(post, self.other_model.policies, self.other_model.num_controls).over_controls
        return sum(p * b for p, b in zip(marginal, self.other_model.b_trans))

    def predicted_prior(self, control: int | None) -> Belief:
        if control is None:
            return self.belief
        q = list(self.belief.factors)
        q[0] = propagate(self.model, q[0], control)
        q[1] = self.other_transition @ q[1]
        q[1] = q[1] / q[1].sum()
        return Belief(tuple(q), self.belief.labels)

    def decide(self, rng=None) -> Decision:
        self.other_transition = self.coupling_transition()
        evals = evaluate_policies(self.model, self.belief, other_transition=self.other_transition)
        post = policy_posterior(evals, self.precision)
        p = Plan(tuple(evals), select_action(post, self.model.policies, self.model.num_controls, self.precision))
        self.last_efe_self = p.min_efe
        if self.w > 0 and self.action_mode == DETERMINISTIC:
            control, valence = select_action_social(self, range(self.model.num_controls), evals)
            return Decision(control, p, valence)
        return Decision(choose(p, self.action_mode, rng), p)

    def observe(self, obs: int, control: int | None = None) -> InferenceResult:
        result = infer_joint(self, obs, control)
        self.belief = result.posterior
        self.last_result = result
        return result

    def snapshot(self):
        from .uncertainty import AgentSnapshot

        return AgentSnapshot(model=self.model, belief=self.belief, other_model=self.other_model,
                             other_belief=self.presumed_other_belief())


@dataclass
class SharedContext:
    """A self-contained third party whose posterior conditions the pair."""

    they: FirstPersonAgent

    @property
    def broadcast(self) -> np.ndarray:
        return self.they.belief.self_factor


def infer_joint(agent: CoupledAgent, obs: int, control: int | None = None) -> InferenceResult:
    """Mean-field inference over the agent's factors; the shared factor, if
    any, is conditioning information and stays clamped."""
    prior = agent.predicted_prior(control)
    k = agent.shared_index
    return infer_state(agent.model, prior, obs, clamped=() if k is None else (k,))


def simulate_other(agent: CoupledAgent, self_as_seen=None) -> list[PolicyEvaluation]:
    """Evaluate the other's policies from this agent's perspective (depth one:
    the simulated other treats this agent as not moving)."""
    return evaluate_policies(agent.other_model, agent.presumed_other_belief(self_as_seen))


def social_emotional_value(delta_g_self: float, delta_g_other: float, w: float) -> float:
    """Valence ``(1 - w)(-dG_self) + w(-dG_other)``; a drop in G is positive."""
    return (1.0 - w) * (-delta_g_self) + w * (-delta_g_other)


def committed_free_energy(evals: Sequence[PolicyEvaluation], num_controls: int, precision: float) -> np.ndarray:
    """Soft minimum of G over the policies that start with each control.

    ``-(1/gamma) ln sum_{pi: pi_0 = u} exp(-gamma G(pi))``. Its argmin is the
    argmax of the control marginal of the policy posterior; it reduces to the
    plain minimum for one-step policies. Controls with no policy get +inf.
    """
    out = np.full(num_controls, np.inf)
    by_control: dict[int, list[float]] = {}
    for e in evals:
        by_control.setdefault(e.policy.controls[0], []).append(-precision * e.efe)
    for u, vals in by_control.items():
        out[u] = -_logsumexp(np.array(vals)) / precision
    return out


def soft_min_efe(evals: Sequence[PolicyEvaluation], precision: float) -> float:
    return -_logsumexp(np.array([-precision * e.efe for e in evals])) / precision


def uncommitted_self(agent: CoupledAgent, evals: Sequence[PolicyEvaluation]) -> np.ndarray:
    """Where this agent expects to be next if it follows its own policy posterior."""
    post = policy_posterior(evals, agent.precision)
    marginal = control_marginal(post, agent.model.policies, agent.model.num_controls)
    q = agent.belief.self_factor
    out = sum(p * propagate(agent.model, q, u) for u, p in enumerate(marginal) if p > 0)
    return out / out.sum()


def valences(agent: CoupledAgent, candidates: Sequence[int], evals: Sequence[PolicyEvaluation] | None = None):
    """Per-candidate ``(delta_g_self, delta_g_other, valence)`` triples.

    Both changes are measured against the uncommitted case: for this agent,
    the soft minimum of G over every policy; for the other, its soft-min G
    when it expects this agent to follow its own control marginal.
    """
    candidates = list(candidates)
    if not candidates:
        raise ModelError("no candidate controls")
    if evals is None:
        evals = evaluate_policies(agent.model, agent.belief, other_transition=agent.other_transition)
    g_self = committed_free_energy(evals, agent.model.num_controls, agent.precision)
    if not np.all(np.isfinite(g_self[candidates])):
        raise ModelError("a candidate control starts no policy")
    base_self = soft_min_efe(evals, agent.precision)
    base_other = soft_min_efe(simulate_other(agent, uncommitted_self(agent, evals)), agent.precision)
    out = []
    for c in candidates:
        committed = propagate(agent.model, agent.belief.self_factor, c)
        g_other = soft_min_efe(simulate_other(agent, committed), agent.precision)
        ds = float(g_self[c] - base_self)
        do = float(g_other - base_other)
        out.append((ds, do, social_emotional_value(ds, do, agent.w)))
    agent.last_efe_other = base_other
    return out


def select_action_social(agent: CoupledAgent, candidates: Sequence[int], evals=None) -> tuple[int, float]:
    """Pick the candidate whose social emotional value is closest to neutral."""
    candidates = list(candidates)
    vals = valences(agent, candidates, evals)
    mags = np.array([abs(v) for _, _, v in vals])
    i = int(np.argmin(mags))
    return candidates[i], vals[i][2]


@dataclass(frozen=True, eq=False)
class AgentStep:
    decision: Decision | None
    obs: int | None
    result: InferenceResult | None


def step_second_person(agents: Sequence, env, rng=None) -> tuple[list[AgentStep], bool]:
    """One synchronized round: everyone decides, actions are committed
    together, then every agent receives its own observation and infers."""
    decisions = [a.decide(rng) for a in agents]
    obs, done = env.step([d.control for d in decisions])
    steps = []
    for a, d, o in zip(agents, decisions, obs):
        steps.append(AgentStep(d, o, a.observe(o, d.control)))
    return steps, done


def step_third_person(agents: Sequence, context: SharedContext, context_env, env, rng=None):
    """The third party steps first, on its own environment; its posterior is
    then clamped into every agent's shared factor before the pair round."""
    they_step = step_context(context, context_env, rng)
    broadcast_context(agents, context)
    steps, done = step_second_person(agents, env, rng)
    return they_step, steps, done


def step_context(context: SharedContext, context_env, rng=None) -> AgentStep:
    d = context.they.decide(rng)
    (o,), _ = context_env.step([d.control])
    return AgentStep(d, o, context.they.observe(o, d.control))


def broadcast_context(agents: Sequence, context: SharedContext) -> None:
    for a in agents:
        if getattr(a, "shared_index", None) is not None:
            a.set_shared(context.broadcast)
