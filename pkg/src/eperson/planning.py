"""Expected free energy of policies and action selection.

For each policy the belief is pushed forward through B (self factor) and, if
an ``other_transition`` is supplied, through that matrix for the other factor.
At each step the epistemic term is the mutual information between predicted
states and observations and the pragmatic term is the expected log-preference.
``G = -(epistemic + pragmatic)`` summed over the horizon.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .model import POLICY_CAP, GenerativeModel, ModelError, OTHER, Policy, PolicyEnumerationError
from .prob import ZERO_MASS, entropy, outer_product, softmax

DEFAULT_PRECISION = 4.0
TIE_TOL = 1e-12


@dataclass(frozen=True)
class PolicyEvaluation:
    policy: Policy
    efe: float
    epistemic: float
    pragmatic: float
    per_step: tuple


@dataclass(frozen=True, eq=False)
class ActionDistribution:
    over_policies: np.ndarray
    over_controls: np.ndarray
    chosen: int
    precision_used: float


def _column_entropies(a: np.ndarray) -> np.ndarray:
    safe = np.where(a > ZERO_MASS, a, 1.0)
    return -np.sum(np.where(a > ZERO_MASS, a * np.log(safe), 0.0), axis=0)


def _row_entropies(p: np.ndarray) -> np.ndarray:
    safe = np.where(p > ZERO_MASS, p, 1.0)
    return -np.sum(np.where(p > ZERO_MASS, p * np.log(safe), 0.0), axis=1)


def evaluate_policies(
    model: GenerativeModel,
    belief,
    policies: Sequence[Policy] | None = None,
    other_transition: np.ndarray | None = None,
    cap: int = POLICY_CAP,
) -> list[PolicyEvaluation]:
    """Evaluate a batch of equal-horizon policies (defaults to the model's set)."""
    policies = list(model.policies if policies is None else policies)
    if not policies:
        raise ModelError("no policies to evaluate")
    if len(policies) > cap:
        raise PolicyEnumerationError(f"{len(policies)} policies exceed the cap of {cap}")
    factors = [np.asarray(f, dtype=np.float64) for f in getattr(belief, "factors", belief)]
    if tuple(len(f) for f in factors) != model.factor_sizes:
        raise ModelError("belief does not match model factors")
    horizon = policies[0].horizon
    if any(p.horizon != horizon for p in policies):
        raise ModelError("policies must share one horizon")
    controls = np.array([p.controls for p in policies], dtype=np.int64)
    if controls.min() < 0 or controls.max() >= model.num_controls:
        raise ModelError("policy references an invalid control")

    b_stack = model.b_stack
    a = model.a_obs
    amb = model.ambiguity
    c = model.c_pref
    other_idx = model.factor_index(OTHER)

    q_self = np.repeat(factors[0][None, :], len(policies), axis=0)
    rest = list(factors[1:])
    epi = np.zeros((len(policies), horizon))
    prag = np.zeros((len(policies), horizon))
    for tau in range(horizon):
        q_self = np.einsum("pij,pj->pi", b_stack[controls[:, tau]], q_self)
        q_self /= q_self.sum(axis=1, keepdims=True)
        if other_transition is not None and other_idx is not None:
            k = other_idx - 1
            rest[k] = other_transition @ rest[k]
            rest[k] = rest[k] / rest[k].sum()
        tail = outer_product(rest)
        q_joint = np.einsum("pi,j->pij", q_self, tail).reshape(len(policies), -1)
        q_obs = q_joint @ a.T
        q_obs /= q_obs.sum(axis=1, keepdims=True)
        epi[:, tau] = _row_entropies(q_obs) - q_joint @ amb
        prag[:, tau] = q_obs @ c

    out = []
    for i, pol in enumerate(policies):
        e, p = float(epi[i].sum()), float(prag[i].sum())
        steps = tuple((float(x), float(y)) for x, y in zip(epi[i], prag[i]))
        out.append(PolicyEvaluation(pol, -(e + p), e, p, steps))
    return out


def expected_free_energy(model: GenerativeModel, belief, policy: Policy, other_transition=None) -> PolicyEvaluation:
    if not isinstance(policy, Policy):
        policy = Policy(policy)
    return evaluate_policies(model, belief, [policy], other_transition)[0]


def information_gain(a: np.ndarray, q_states: np.ndarray) -> float:
    """``E_{Q(o)} KL[Q(s|o) || Q(s)]`` computed by explicit Bayes per outcome.

    Independent of the entropy-difference route used in
    :func:`evaluate_policies`; used for cross-checks.
    """
    q_states = np.asarray(q_states, dtype=np.float64)
    joint = a * q_states[None, :]
    total = 0.0
    for o in range(a.shape[0]):
        p_o = joint[o].sum()
        if p_o <= 0:
            continue
        post = joint[o] / p_o
        mask = post > 0
        total += p_o * np.sum(post[mask] * np.log(post[mask] / q_states[mask]))
    return float(total)


def mutual_information(a: np.ndarray, q_states: np.ndarray) -> float:
    """``H[Q(o)] - E_{Q(s)} H[P(o|s)]``."""
    q_obs = a @ q_states
    return entropy(q_obs / q_obs.sum()) - float(q_states @ _column_entropies(a))


def policy_posterior(evals: Sequence[PolicyEvaluation], precision: float = DEFAULT_PRECISION) -> np.ndarray:
    if not evals:
        raise ModelError("policy_posterior needs at least one evaluation")
    return softmax(-np.array([e.efe for e in evals]), precision)


def control_marginal(posterior: np.ndarray, policies: Sequence[Policy], num_controls: int) -> np.ndarray:
    out = np.zeros(num_controls)
    for p, pol in zip(posterior, policies):
        out[pol.controls[0]] += p
    return out


def select_action(
    posterior: np.ndarray,
    policies: Sequence[Policy],
    num_controls: int | None = None,
    precision: float = DEFAULT_PRECISION,
) -> ActionDistribution:
    """Marginalize the policy posterior onto first controls and take the argmax.

    Marginals within ``TIE_TOL`` of the maximum count as tied so that rounding
    noise cannot override the lowest-index tie-break.
    """
    posterior = np.asarray(posterior, dtype=np.float64)
    if len(posterior) != len(policies):
        raise ModelError("posterior and policy list lengths differ")
    if num_controls is None:
        num_controls = max(p.controls[0] for p in policies) + 1
    marginal = control_marginal(posterior, policies, num_controls)
    chosen = int(np.flatnonzero(marginal >= marginal.max() - TIE_TOL)[0])
    return ActionDistribution(posterior, marginal, chosen, float(precision))


def sample_control(dist: ActionDistribution, rng: np.random.Generator) -> int:
    return int(rng.choice(len(dist.over_controls), p=dist.over_controls / dist.over_controls.sum()))


@dataclass(frozen=True, eq=False)
class Plan:
    evaluations: tuple
    action: ActionDistribution

    @property
    def chosen(self) -> int:
        return self.action.chosen

    @property
    def min_efe(self) -> float:
        return min(e.efe for e in self.evaluations)


def plan(model: GenerativeModel, belief, precision: float = DEFAULT_PRECISION, other_transition=None) -> Plan:
    evals = evaluate_policies(model, belief, other_transition=other_transition)
    post = policy_posterior(evals, precision)
    return Plan(tuple(evals), select_action(post, model.policies, model.num_controls, precision))
