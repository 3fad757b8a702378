"""A single first-person agent in a world that samples from its own model.

The matrices come from configuration: ``A`` (obs x states), one ``B`` slice
per control, ``C`` (log-preferences over observations), ``D`` (prior) and a
policy horizon. The environment draws the true state from ``D``, moves it
through ``B`` and emits observations from ``A``.
"""

from __future__ import annotations

import numpy as np

from ..agent import FirstPersonAgent
from ..model import GenerativeModel, enumerate_policies, validate
from .base import Scenario, ScenarioError


class ModelEnv:
    num_agents = 1

    def __init__(self, model: GenerativeModel):
        self.model = model
        self.state = 0
        self.num_obs = model.num_obs
        self.num_controls = model.num_controls

    def reset(self, rng):
        self._rng = np.random.default_rng(int(rng.integers(2**63 - 1)))
        self.state = int(self._rng.choice(self.model.num_states, p=self.model.d_prior[0]))
        return [self._emit()]

    def _emit(self) -> int:
        return int(self._rng.choice(self.model.num_obs, p=self.model.a_obs[:, self.state]))

    def step(self, controls):
        (u,) = controls
        b = self.model.b_trans[int(u)]
        self.state = int(self._rng.choice(self.model.num_states, p=b[:, self.state]))
        return [self._emit()], False


def build_model(A, B, C, D, horizon: int = 1, policy_cap: int | None = None) -> GenerativeModel:
    try:
        a = np.asarray(A, dtype=np.float64)
        bs = tuple(np.asarray(b, dtype=np.float64) for b in B)
        c = np.asarray(C, dtype=np.float64)
        d = np.asarray(D, dtype=np.float64)
    except (TypeError, ValueError) as exc:
        raise ScenarioError(f"model matrices must be numeric arrays: {exc}") from exc
    if not bs:
        raise ScenarioError("B needs at least one control slice")
    kwargs = {} if policy_cap is None else {"cap": policy_cap}
    model = GenerativeModel(a, bs, c, (d,), tuple(enumerate_policies(len(bs), horizon, **kwargs)))
    report = validate(model)
    if not report.ok:
        raise ScenarioError("invalid custom model: " + "; ".join(report.problems))
    return model


def make(seed=None, A=None, B=None, C=None, D=None, horizon=1, precision=4.0, action_mode="deterministic",
         policy_cap=None) -> Scenario:
    if A is None or B is None or C is None or D is None:
        raise ScenarioError("custom scenario needs A, B, C and D")
    model = build_model(A, B, C, D, horizon, policy_cap)
    agent = FirstPersonAgent(model, precision, action_mode, name="agent")
    return Scenario("custom", "first", ModelEnv(model), [agent], ["agent"],
                    params=dict(horizon=horizon, precision=precision))
