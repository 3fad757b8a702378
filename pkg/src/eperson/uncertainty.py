"""The 3 x 3 uncertainty matrix (levels x persons) for one agent at one time.

Uncertainty is Shannon entropy in nats. Joint uncertainties use the
mean-field factorization, i.e. they are sums of factor entropies. Cells that
do not exist for an agent's topology are ``None`` and serialize as ``"NA"``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import GenerativeModel, SHARED, predict_observation
from .perception import Belief
from .prob import entropy, joint_entropy

LEVELS = ("level1", "level2", "level3")
PERSONS = ("first", "second", "third")
NA = "NA"


@dataclass(frozen=True, eq=False)
class AgentSnapshot:
    model: GenerativeModel
    belief: Belief
    high_belief: Belief | None = None
    high_model: GenerativeModel | None = None
    other_model: GenerativeModel | None = None
    other_belief: Belief | None = None
    other_high_belief: Belief | None = None


@dataclass(frozen=True, eq=False)
class ContextSnapshot:
    model: GenerativeModel
    belief: Belief
    high_belief: Belief | None = None

    @classmethod
    def of(cls, context) -> "ContextSnapshot":
        they = context.they
        return cls(they.model, they.belief, getattr(they, "high_belief", None))


@dataclass(frozen=True)
class UncertaintyMatrix:
    cells: tuple
    bounds: tuple

    def cell(self, level: int, person: int):
        """Cell by 1-based level and person index."""
        return self.cells[level - 1][person - 1]

    def present(self):
        for i, row in enumerate(self.cells):
            for j, v in enumerate(row):
                if v is not None:
                    yield i + 1, j + 1, v

    def to_dict(self) -> dict:
        return {f"{lv}.{p}": (NA if self.cells[i][j] is None else self.cells[i][j])
                for i, lv in enumerate(LEVELS) for j, p in enumerate(PERSONS)}

    def valid(self, tol: float = 1e-9) -> bool:
        return all(-tol <= v <= self.bounds[i - 1][j - 1] + tol for i, j, v in self.present())


def u_observable(snap: AgentSnapshot) -> float:
    return entropy(predict_observation(snap.model, snap.belief))


def u_hidden_low(snap: AgentSnapshot) -> float:
    return entropy(snap.belief.self_factor)


def u_hidden_high(snap: AgentSnapshot) -> float | None:
    if snap.high_belief is None:
        return None
    return entropy(snap.high_belief.self_factor)


def _other_prediction(snap: AgentSnapshot):
    if snap.other_model is None or snap.other_belief is None:
        return None
    return predict_observation(snap.other_model, snap.other_belief)


def u_second_person(snap: AgentSnapshot):
    """``(level1, level2, level3)`` joint uncertainties over self and other."""
    if snap.other_model is None or len(snap.belief.factors) < 2:
        return None, None, None
    l1 = joint_entropy([predict_observation(snap.model, snap.belief), _other_prediction(snap)])
    l2 = joint_entropy(snap.belief.factors[:2])
    l3 = None
    if snap.high_belief is not None and snap.other_high_belief is not None:
        l3 = joint_entropy([snap.high_belief.self_factor, snap.other_high_belief.self_factor])
    return l1, l2, l3


def _their_low_factor(snap: AgentSnapshot, ctx: ContextSnapshot):
    k = snap.model.factor_index(SHARED)
    return snap.belief.factors[k] if k is not None else ctx.belief.self_factor


def u_third_person(snap: AgentSnapshot, ctx: ContextSnapshot | None):
    if ctx is None or snap.other_model is None or len(snap.belief.factors) < 2:
        return None, None, None
    they_obs = predict_observation(ctx.model, ctx.belief)
    l1 = joint_entropy([predict_observation(snap.model, snap.belief), _other_prediction(snap), they_obs])
    l2 = joint_entropy(list(snap.belief.factors[:2]) + [_their_low_factor(snap, ctx)])
    l3 = None
    if snap.high_belief is not None and snap.other_high_belief is not None and ctx.high_belief is not None:
        l3 = joint_entropy([snap.high_belief.self_factor, snap.other_high_belief.self_factor,
                            ctx.high_belief.self_factor])
    return l1, l2, l3


def _log(n) -> float:
    return float(np.log(n))


def matrix(snap: AgentSnapshot, context: ContextSnapshot | None = None) -> UncertaintyMatrix:
    m = snap.model
    first = (u_observable(snap), u_hidden_low(snap), u_hidden_high(snap))
    second = u_second_person(snap)
    third = u_third_person(snap, context)
    cells = tuple(tuple(col[i] for col in (first, second, third)) for i in range(3))

    n_high = snap.high_belief.self_factor.size if snap.high_belief is not None else 1
    n_other_obs = snap.other_model.num_obs if snap.other_model is not None else 1
    n_other = m.factor_sizes[1] if len(m.factor_sizes) > 1 else 1
    n_other_high = snap.other_high_belief.self_factor.size if snap.other_high_belief is not None else 1
    if context is not None:
        n_they_obs = context.model.num_obs
        n_they = context.model.num_states
        n_they_high = context.high_belief.self_factor.size if context.high_belief is not None else 1
    else:
        n_they_obs = n_they = n_they_high = 1
    bounds = (
        (_log(m.num_obs), _log(m.num_obs * n_other_obs), _log(m.num_obs * n_other_obs * n_they_obs)),
        (_log(m.num_states), _log(m.num_states * n_other), _log(m.num_states * n_other * n_they)),
        (_log(n_high), _log(n_high * n_other_high), _log(n_high * n_other_high * n_they_high)),
    )
    return UncertaintyMatrix(cells, bounds)
