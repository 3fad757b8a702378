"""Generative model bundle: observation model A, transitions B, preferences C,
initial prior D and an explicit policy set."""

from __future__ import annotations

import itertools
from functools import cached_property
from dataclasses import dataclass, field, replace

import numpy as np

from .prob import (
    ZERO_MASS,
    is_categorical,
    log_normalize,
    outer_product,
    table_problems,
)

SELF, OTHER, SHARED = "self", "other", "shared"
FACTOR_KINDS = (SELF, OTHER, SHARED)

#: Default upper bound on |controls| ** horizon.
POLICY_CAP = 1024


class ModelError(ValueError):
    pass


class PolicyEnumerationError(ModelError):
    pass


@dataclass(frozen=True)
class Factor:
    kind: str
    size: int
    name: str = ""


@dataclass(frozen=True)
class Policy:
    controls: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "controls", tuple(int(c) for c in self.controls))

    @property
    def horizon(self) -> int:
        return len(self.controls)

    def __len__(self):
        return len(self.controls)


def enumerate_policies(num_controls: int, horizon: int, cap: int = POLICY_CAP) -> list[Policy]:
    """All control sequences of length ``horizon``, lexicographic order."""
    if horizon < 1 or num_controls < 1:
        raise PolicyEnumerationError("horizon and number of controls must be >= 1")
    count = num_controls**horizon
    if count > cap:
        raise PolicyEnumerationError(
            f"{num_controls} controls over horizon {horizon} gives {count} policies, above the cap of {cap}"
        )
    return [Policy(p) for p in itertools.product(range(num_controls), repeat=horizon)]


def _frozen(a) -> np.ndarray:
    arr = np.array(a, dtype=np.float64)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class GenerativeModel:
    """One agent level.

    ``a_obs`` has shape ``(num_obs, prod(factor sizes))`` with joint state
    configurations flattened row-major in factor order. ``b_trans`` holds one
    ``(n_self, n_self)`` column-stochastic slice per control and acts on the
    self factor only. ``c_pref`` is renormalized on construction so that
    ``exp(c_pref)`` sums to one. ``d_prior`` holds one prior per factor.
    """

    a_obs: np.ndarray
    b_trans: tuple
    c_pref: np.ndarray
    d_prior: tuple
    policies: tuple
    factors: tuple = field(default=())

    def __post_init__(self):
        a = _frozen(self.a_obs)
        if a.ndim == 1:
            a = _frozen(a[:, None])
        object.__setattr__(self, "a_obs", a)
        object.__setattr__(self, "b_trans", tuple(_frozen(b) for b in self.b_trans))
        d = self.d_prior
        if isinstance(d, np.ndarray) and d.ndim == 1:
            d = (d,)
        elif len(d) and np.isscalar(d[0]):
            d = (d,)
        object.__setattr__(self, "d_prior", tuple(_frozen(x) for x in d))
        if not self.factors:
            object.__setattr__(self, "factors", tuple(Factor(SELF if i == 0 else OTHER, len(x))
                                                      for i, x in enumerate(self.d_prior)))
        else:
            object.__setattr__(self, "factors", tuple(self.factors))
        c = np.asarray(self.c_pref, dtype=np.float64)
        if c.ndim == 1 and c.size and np.all(np.isfinite(c)):
            c = log_normalize(c)
        object.__setattr__(self, "c_pref", _frozen(c))
        pols = tuple(p if isinstance(p, Policy) else Policy(p) for p in self.policies)
        object.__setattr__(self, "policies", pols)

    @property
    def num_obs(self) -> int:
        return self.a_obs.shape[0]

    @property
    def num_controls(self) -> int:
        return len(self.b_trans)

    @property
    def factor_sizes(self) -> tuple[int, ...]:
        return tuple(f.size for f in self.factors)

    @property
    def num_states(self) -> int:
        return self.factors[0].size

    @property
    def horizon(self) -> int:
        return self.policies[0].horizon if self.policies else 0

    @cached_property
    def ambiguity(self) -> np.ndarray:
        """Entropy of ``P(o | s)`` for every joint state configuration."""
        a = self.a_obs
        mask = a > ZERO_MASS
        return _frozen(-np.sum(np.where(mask, a * np.log(np.where(mask, a, 1.0)), 0.0), axis=0))

    @cached_property
    def b_stack(self) -> np.ndarray:
        return _frozen(np.stack(self.b_trans))

    @property
    def a_tensor(self) -> np.ndarray:
        return self.a_obs.reshape((self.num_obs,) + self.factor_sizes)

    def factor_index(self, kind: str) -> int | None:
        for i, f in enumerate(self.factors):
            if f.kind == kind:
                return i
        return None

    def with_preferences(self, c_pref) -> "GenerativeModel":
        return replace(self, c_pref=c_pref)

    def with_prior(self, d_prior) -> "GenerativeModel":
        return replace(self, d_prior=d_prior)

    def with_policies(self, policies) -> "GenerativeModel":
        return replace(self, policies=tuple(policies))


@dataclass
class ValidationReport:
    problems: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.problems

    def __bool__(self):
        return self.ok

    def raise_if_failed(self, what: str = "model"):
        if self.problems:
            raise ModelError(f"invalid {what}: " + "; ".join(self.problems))


def validate(model: GenerativeModel) -> ValidationReport:
    """Check every structural invariant; never raises."""
    report = ValidationReport()
    problems = report.problems
    sizes = model.factor_sizes
    if not sizes or any(s < 1 for s in sizes):
        problems.append(f"factor sizes must be positive, got {sizes}")
        return report
    kinds = [f.kind for f in model.factors]
    if kinds[0] != SELF or any(k not in FACTOR_KINDS for k in kinds) or kinds.count(SELF) != 1:
        problems.append(f"factor kinds must start with a single '{SELF}' factor, got {kinds}")
    if len(model.d_prior) != len(sizes):
        problems.append(f"d_prior has {len(model.d_prior)} factors, model declares {len(sizes)}")
    for i, (d, n) in enumerate(zip(model.d_prior, sizes)):
        if d.shape != (n,):
            problems.append(f"d_prior[{i}] has shape {d.shape}, expected ({n},)")
        elif not is_categorical(d):
            problems.append(f"d_prior[{i}] is not a valid categorical")
    a = model.a_obs
    joint = int(np.prod(sizes))
    if a.ndim != 2 or a.shape[1] != joint:
        problems.append(f"a_obs has shape {a.shape}, expected (num_obs, {joint})")
    else:
        problems.extend(f"a_obs {p}" for p in table_problems(a))
    n_self = sizes[0]
    if not model.b_trans:
        problems.append("b_trans has no control slices")
    for u, b in enumerate(model.b_trans):
        if b.shape != (n_self, n_self):
            problems.append(f"b_trans[{u}] has shape {b.shape}, expected ({n_self}, {n_self})")
        else:
            problems.extend(f"b_trans[{u}] {p}" for p in table_problems(b))
    c = model.c_pref
    if c.ndim != 1 or c.shape[0] != a.shape[0]:
        problems.append(f"c_pref has shape {c.shape}, expected ({a.shape[0]},)")
    elif not np.all(np.isfinite(c)):
        problems.append("c_pref has non-finite entries")
    elif abs(np.exp(c).sum() - 1.0) > 1e-9:
        problems.append("exp(c_pref) does not normalize")
    if not model.policies:
        problems.append("policy set is empty")
    horizons = {p.horizon for p in model.policies}
    if len(horizons) > 1:
        problems.append(f"policies do not share one horizon: {sorted(horizons)}")
    for i, p in enumerate(model.policies):
        if p.horizon < 1:
            problems.append(f"policy {i} is empty")
        bad = [c for c in p.controls if not 0 <= c < len(model.b_trans)]
        if bad:
            problems.append(f"policy {i} references invalid control(s) {bad}")
    return report


def _factor_list(belief) -> list[np.ndarray]:
    return list(getattr(belief, "factors", belief))


def predict_observation(model: GenerativeModel, belief) -> np.ndarray:
    """Predictive observation distribution ``A @ (q_1 x q_2 x ...)``."""
    factors = _factor_list(belief)
    if tuple(len(f) for f in factors) != model.factor_sizes:
        raise ModelError(
            f"belief factor sizes {tuple(len(f) for f in factors)} do not match model {model.factor_sizes}"
        )
    q = model.a_obs @ outer_product(factors)
    return q / q.sum()


def propagate(model: GenerativeModel, belief_self, control: int) -> np.ndarray:
    """Push the self-factor belief through the transition slice for ``control``."""
    if not 0 <= control < model.num_controls:
        raise ModelError(f"control {control} out of range for {model.num_controls} controls")
    q = model.b_trans[control] @ np.asarray(belief_self, dtype=np.float64)
    return q / q.sum()


def identity_transitions(n: int, num_controls: int = 1) -> list[np.ndarray]:
    return [np.eye(n) for _ in range(num_controls)]


def set_state_transitions(n: int) -> list[np.ndarray]:
    """Control ``u`` moves the factor to state ``u`` from anywhere."""
    slices = []
    for u in range(n):
        b = np.zeros((n, n))
        b[u, :] = 1.0
        slices.append(b)
    return slices
