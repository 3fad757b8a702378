"""State inference by variational free-energy minimization.

Single-factor beliefs are updated by exact Bayes, which is the free-energy
optimum. Factorized (multi-agent) beliefs use mean-field coordinate ascent.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .model import GenerativeModel, ModelError, SELF
from .prob import (
    ProbabilityError,
    ZERO_MASS,
    kl_divergence,
    log_floor,
    normalize,
    outer_product,
)

EVIDENCE_FLOOR = 1e-300
MAX_SWEEPS = 64
CONVERGENCE_TOL = 1e-8


class ImpossibleObservationError(ProbabilityError):
    """The observation has (numerically) zero probability under the model."""


@dataclass(frozen=True, eq=False)
class Belief:
    factors: tuple
    labels: tuple = ()

    def __post_init__(self):
        fs = tuple(np.array(f, dtype=np.float64) for f in self.factors)
        for f in fs:
            f.setflags(write=False)
        object.__setattr__(self, "factors", fs)
        if not self.labels:
            object.__setattr__(self, "labels", tuple(SELF if i == 0 else f"f{i}" for i in range(len(fs))))
        else:
            object.__setattr__(self, "labels", tuple(self.labels))

    @classmethod
    def prior_of(cls, model: GenerativeModel) -> "Belief":
        return cls(model.d_prior, tuple(f.kind for f in model.factors))

    @property
    def self_factor(self) -> np.ndarray:
        return self.factors[0]

    def factor(self, kind: str) -> np.ndarray | None:
        for label, f in zip(self.labels, self.factors):
            if label == kind:
                return f
        return None

    def with_factor(self, index: int, value) -> "Belief":
        fs = list(self.factors)
        fs[index] = value
        return Belief(tuple(fs), self.labels)

    def joint(self) -> np.ndarray:
        return outer_product(self.factors)

    def allclose(self, other: "Belief", atol: float = 1e-10) -> bool:
        return len(self.factors) == len(other.factors) and all(
            a.shape == b.shape and np.allclose(a, b, rtol=0, atol=atol)
            for a, b in zip(self.factors, other.factors)
        )


@dataclass(frozen=True, eq=False)
class InferenceResult:
    posterior: Belief
    free_energy: float
    log_evidence: float
    iterations_used: int
    free_energy_history: tuple = ()


def _check(model: GenerativeModel, belief: Belief, obs: int):
    if not 0 <= obs < model.num_obs:
        raise ModelError(f"observation {obs} out of range for {model.num_obs} outcomes")
    sizes = tuple(len(f) for f in belief.factors)
    if sizes != model.factor_sizes:
        raise ModelError(f"belief factor sizes {sizes} do not match model {model.factor_sizes}")


def _neg_entropy_term(q: np.ndarray) -> float:
    nz = q[q > ZERO_MASS]
    return float(np.sum(nz * np.log(nz)))


def _cross_term(q: np.ndarray, log_p: np.ndarray) -> float:
    mask = q > ZERO_MASS
    return float(np.sum(q[mask] * log_p[mask]))


def _prior_factors(model: GenerativeModel, prior) -> tuple:
    if prior is None:
        return model.d_prior
    return tuple(getattr(prior, "factors", prior))


def log_evidence(model: GenerativeModel, prior, obs: int) -> float:
    """``ln p(obs)`` under the product prior, by exact enumeration."""
    p_obs = float(model.a_obs[obs] @ outer_product(_prior_factors(model, prior)))
    if p_obs < EVIDENCE_FLOOR:
        raise ImpossibleObservationError(f"observation {obs} has probability {p_obs:.3g} under the model")
    return float(np.log(p_obs))


def variational_free_energy(belief: Belief, model: GenerativeModel, obs: int, prior=None) -> float:
    """``F = E_q[ln q(s) - ln p(obs, s)]`` for a (possibly factorized) belief.

    ``prior`` defaults to the model's initial prior D.
    """
    _check(model, belief, obs)
    priors = _prior_factors(model, prior)
    log_evidence(model, priors, obs)
    total = 0.0
    for q, p in zip(belief.factors, priors):
        total += _neg_entropy_term(q) - _cross_term(q, log_floor(p))
    log_lik = log_floor(model.a_obs[obs])
    total -= _cross_term(belief.joint(), log_lik)
    return total


def free_energy_forms(belief: Belief, model: GenerativeModel, obs: int, prior=None):
    """Both algebraic forms of the free energy.

    Returns ``(energy_form, divergence_form)`` where the first is
    ``E_q[ln q - ln p(o, s)]`` and the second ``KL(q || p(s|o)) - ln p(o)``.
    The second is ``None`` when ``q`` is not absolutely continuous with
    respect to the exact posterior (the divergence is infinite).
    """
    priors = _prior_factors(model, prior)
    energy = variational_free_energy(belief, model, obs, priors)
    joint_prior = outer_product(priors)
    unnorm = model.a_obs[obs] * joint_prior
    evidence = unnorm.sum()
    posterior = unnorm / evidence
    q = belief.joint()
    q = np.where(q > ZERO_MASS, q, 0.0)
    q = q / q.sum()
    try:
        divergence = kl_divergence(q, posterior) - np.log(evidence)
    except ProbabilityError:
        divergence = None
    return energy, divergence


def exact_posterior(model: GenerativeModel, prior, obs: int) -> np.ndarray:
    """Exact joint posterior over flattened joint configurations."""
    joint_prior = outer_product(_prior_factors(model, prior))
    unnorm = model.a_obs[obs] * joint_prior
    if unnorm.sum() < EVIDENCE_FLOOR:
        raise ImpossibleObservationError(f"observation {obs} is impossible under the model")
    return normalize(unnorm)


def _expected_log_lik(log_lik: np.ndarray, factors: Sequence[np.ndarray], k: int) -> np.ndarray:
    """Expectation of the log-likelihood tensor over every factor except ``k``."""
    t = log_lik
    # Contract from the last axis down so axis indices stay valid.
    for j in range(len(factors) - 1, -1, -1):
        if j != k:
            t = np.tensordot(t, factors[j], axes=([j], [0]))
    return t


def infer_state(model: GenerativeModel, prior: Belief | None, obs: int, clamped: Sequence[int] = ()) -> InferenceResult:
    """Posterior over hidden states after observing ``obs``.

    Factors listed in ``clamped`` are held at their prior value (they are
    conditioning information supplied from outside the agent).
    """
    if prior is None:
        prior = Belief.prior_of(model)
    _check(model, prior, obs)
    log_ev = log_evidence(model, prior, obs)
    free = [k for k in range(len(prior.factors)) if k not in set(clamped)]

    if len(prior.factors) == 1:
        post = exact_posterior(model, prior, obs)
        posterior = Belief((post,), prior.labels)
        f = variational_free_energy(posterior, model, obs, prior)
        return InferenceResult(posterior, f, log_ev, 1, (f,))

    return _mean_field(model, prior, obs, free, log_ev)


def _mean_field(model, prior: Belief, obs: int, free: list, log_ev: float) -> InferenceResult:
    sizes = model.factor_sizes
    log_lik = log_floor(model.a_obs[obs]).reshape(sizes)
    log_priors = [log_floor(p) for p in prior.factors]
    q = [np.array(p) for p in prior.factors]
    history = [variational_free_energy(Belief(tuple(q), prior.labels), model, obs, prior)]
    sweeps = 0
    for sweeps in range(1, MAX_SWEEPS + 1):
        change = 0.0
        for k in free:
            logits = log_priors[k] + _expected_log_lik(log_lik, q, k)
            new = np.exp(logits - logits.max())
            new /= new.sum()
            change = max(change, float(np.max(np.abs(new - q[k]))))
            q[k] = new
            history.append(variational_free_energy(Belief(tuple(q), prior.labels), model, obs, prior))
        if change < CONVERGENCE_TOL:
            break
    posterior = Belief(tuple(q), prior.labels)
    return InferenceResult(posterior, history[-1], log_ev, sweeps, tuple(history))
