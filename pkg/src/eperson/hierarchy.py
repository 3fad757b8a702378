"""Two-level agents.

The higher level holds a belief over contexts. Each context is bound to a
lower-level prior D and preference vector C; the higher belief mixes those
bindings down, and the argmax of the lower posterior is passed up as the
higher level's observation.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .agent import DETERMINISTIC, Decision, choose
from .model import GenerativeModel, ModelError, propagate, validate
from .perception import Belief, InferenceResult, infer_state
from .planning import DEFAULT_PRECISION, plan
from .prob import log_normalize, normalize

ARGMAX_SUMMARY = "argmax-summary"


@dataclass(frozen=True, eq=False)
class ContextBinding:
    d_prior: np.ndarray
    c_pref: np.ndarray


@dataclass(frozen=True, eq=False)
class StepResult:
    low: InferenceResult
    high: InferenceResult
    high_obs: int
    decision: Decision


def mix_bindings(weights, bindings: Sequence[ContextBinding]) -> tuple[np.ndarray, np.ndarray]:
    """Context-weighted lower prior and preferences.

    Preferences are mixed in probability space and re-logged so that
    ``exp(C)`` stays normalized.
    """
    if len(weights) != len(bindings):
        raise ModelError(f"{len(weights)} context weights but {len(bindings)} bindings")
    d = sum(w * np.asarray(b.d_prior) for w, b in zip(weights, bindings))
    pc = sum(w * np.exp(log_normalize(b.c_pref)) for w, b in zip(weights, bindings))
    return normalize(d), log_normalize(np.log(np.maximum(pc, 1e-300)))


def summary_likelihood(low_a: np.ndarray, num_contexts: int, reliability: float = 0.99) -> np.ndarray:
    """Higher-level observation model for argmax summaries.

    Lower states are indexed ``position * num_contexts + context``. A summary
    reports its context with the given reliability, but only at positions
    where the lower likelihood tells contexts apart; elsewhere the summary is
    uninformative. Positions are equiprobable a priori.
    """
    low_a = np.asarray(low_a, dtype=np.float64)
    n_low = low_a.shape[1]
    if n_low % num_contexts:
        raise ModelError("lower state count is not a multiple of the context count")
    n_pos = n_low // num_contexts
    high = np.zeros((n_low, num_contexts))
    for pos in range(n_pos):
        cols = low_a[:, pos * num_contexts:(pos + 1) * num_contexts]
        informative = not np.allclose(cols, cols[:, :1], atol=1e-12)
        for j in range(num_contexts):
            for k in range(num_contexts):
                if informative:
                    p = reliability if j == k else (1 - reliability) / max(num_contexts - 1, 1)
                else:
                    p = 1.0 / num_contexts
                high[pos * num_contexts + j, k] = p / n_pos
    return high


class HierarchicalAgent:
    kind = "hierarchical"

    def __init__(self, high: GenerativeModel, low: GenerativeModel, bindings: Sequence[ContextBinding],
                 precision: float = DEFAULT_PRECISION, action_mode: str = DETERMINISTIC,
                 link_mode: str = ARGMAX_SUMMARY, name: str = "agent"):
        if link_mode != ARGMAX_SUMMARY:
            raise ModelError(f"unsupported link mode {link_mode!r}; only {ARGMAX_SUMMARY!r} is available")
        if len(bindings) != high.num_states:
            raise ModelError(f"{len(bindings)} bindings for {high.num_states} higher-level states")
        for i, b in enumerate(bindings):
            if np.shape(b.d_prior) != (low.num_states,) or np.shape(b.c_pref) != (low.num_obs,):
                raise ModelError(f"binding {i} does not match the lower model dimensions")
        if high.num_obs != low.num_states:
            raise ModelError("higher observation alphabet must equal the lower state space")
        validate(high).raise_if_failed("higher model")
        self.high = high
        self.low_template = low
        self.bindings = tuple(bindings)
        self.link_mode = link_mode
        self.precision = precision
        self.action_mode = action_mode
        self.name = name
        self.reset()

    def reset(self):
        self.high_belief = Belief.prior_of(self.high)
        d, c = descend(self)
        self.low = self.low_template.with_prior((d,)).with_preferences(c)
        self.low_belief = Belief((d,), (self.low.factors[0].kind,))
        self.last_result: InferenceResult | None = None
        self.last_high_result: InferenceResult | None = None
        self._started = False

    # the runner protocol
    @property
    def belief(self) -> Belief:
        return self.low_belief

    @property
    def model(self) -> GenerativeModel:
        return self.low

    def decide(self, rng=None) -> Decision:
        p = plan(self.low, self.low_belief, self.precision)
        return Decision(choose(p, self.action_mode, rng), p)

    def observe(self, obs: int, control: int | None = None) -> InferenceResult:
        low_res, _, _ = _perceive(self, obs, control)
        return low_res

    def snapshot(self):
        from .uncertainty import AgentSnapshot

        return AgentSnapshot(model=self.low, belief=self.low_belief, high_belief=self.high_belief,
                             high_model=self.high)


def descend(agent: HierarchicalAgent) -> tuple[np.ndarray, np.ndarray]:
    return mix_bindings(agent.high_belief.self_factor, agent.bindings)


def ascend(agent: HierarchicalAgent, low_result: InferenceResult) -> int:
    return int(np.argmax(low_result.posterior.self_factor))


def _perceive(agent: HierarchicalAgent, obs: int, control):
    d, c = descend(agent)
    agent.low = agent.low_template.with_prior((d,)).with_preferences(c)
    if control is None:
        low_prior = agent.low_belief
    else:
        low_prior = Belief((propagate(agent.low, agent.low_belief.self_factor, control),), agent.low_belief.labels)
    low_res = infer_state(agent.low, low_prior, obs)
    high_obs = ascend(agent, low_res)
    if agent._started:
        high_prior = Belief((propagate(agent.high, agent.high_belief.self_factor, 0),), agent.high_belief.labels)
    else:
        high_prior = agent.high_belief
    high_res = infer_state(agent.high, high_prior, high_obs)
    agent.low_belief = low_res.posterior
    agent.high_belief = high_res.posterior
    agent.last_result = low_res
    agent.last_high_result = high_res
    agent._started = True
    return low_res, high_res, high_obs


def step_hierarchical(agent: HierarchicalAgent, obs_low: int, control: int | None = None, rng=None) -> StepResult:
    """One full timestep: descend, lower inference, ascend, higher inference,
    then lower planning under the preferences set by the descent."""
    low_res, high_res, high_obs = _perceive(agent, obs_low, control)
    return StepResult(low_res, high_res, high_obs, agent.decide(rng))
