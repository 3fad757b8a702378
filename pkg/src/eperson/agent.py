"""First-person agent: perception plus planning over a single generative model.

Every agent type in the package follows the same small protocol used by the
episode runner: ``reset()``, ``decide(rng)``, ``observe(obs, control)`` and
``snapshot()``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import GenerativeModel, propagate
from .perception import Belief, InferenceResult, infer_state
from .planning import DEFAULT_PRECISION, Plan, plan, sample_control

DETERMINISTIC, SAMPLE = "deterministic", "sample"


@dataclass(frozen=True, eq=False)
class Decision:
    control: int
    plan: Plan
    valence: float | None = None


def choose(p: Plan, mode: str, rng: np.random.Generator | None) -> int:
    if mode == SAMPLE:
        if rng is None:
            raise ValueError("sampling mode needs a random generator")
        return sample_control(p.action, rng)
    return p.chosen


class FirstPersonAgent:
    kind = "first"

    def __init__(self, model: GenerativeModel, precision: float = DEFAULT_PRECISION,
                 action_mode: str = DETERMINISTIC, name: str = "agent"):
        self.model = model
        self.precision = precision
        self.action_mode = action_mode
        self.name = name
        self.reset()

    def reset(self):
        self.belief = Belief.prior_of(self.model)
        self.last_result: InferenceResult | None = None

    def predicted_prior(self, control: int | None) -> Belief:
        if control is None:
            return self.belief
        return self.belief.with_factor(0, propagate(self.model, self.belief.self_factor, control))

    def decide(self, rng=None) -> Decision:
        p = plan(self.model, self.belief, self.precision)
        return Decision(choose(p, self.action_mode, rng), p)

    def observe(self, obs: int, control: int | None = None) -> InferenceResult:
        result = infer_state(self.model, self.predicted_prior(control), obs)
        self.belief = result.posterior
        self.last_result = result
        return result

    def snapshot(self):
        from .uncertainty import AgentSnapshot

        return AgentSnapshot(model=self.model, belief=self.belief)
