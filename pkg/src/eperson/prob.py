"""Categorical probability primitives.

Categoricals are plain 1-D float64 arrays; the helpers here validate them at
module boundaries and implement the handful of exact operations everything
else builds on. All quantities are in nats.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np

#: Clamp applied before taking the log of a model probability.
LOG_FLOOR = 1e-16
#: Belief entries below this are treated as exact zeros in entropy.
ZERO_MASS = 1e-16
#: Tolerance on normalization of categoricals and table columns.
NORM_TOL = 1e-12
_IDEMPOTENT_TOL = 64 * np.finfo(np.float64).eps


class ProbabilityError(ValueError):
    """Raised when an input violates a probability invariant."""


def as_categorical(p, name: str = "distribution") -> np.ndarray:
    """Return ``p`` as a float64 vector after checking it is a categorical."""
    arr = np.asarray(p, dtype=np.float64)
    if arr.ndim != 1 or arr.size < 1:
        raise ProbabilityError(f"{name}: expected a non-empty 1-D vector, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ProbabilityError(f"{name}: non-finite entries")
    if np.any(arr < 0):
        raise ProbabilityError(f"{name}: negative entries at {np.flatnonzero(arr < 0).tolist()}")
    total = arr.sum()
    if abs(total - 1.0) > NORM_TOL:
        raise ProbabilityError(f"{name}: sums to {total!r}, not 1")
    return arr


def is_categorical(p) -> bool:
    try:
        as_categorical(p)
    except ProbabilityError:
        return False
    return True


def check_table(table, name: str = "table") -> np.ndarray:
    """Validate a conditional table: 2-D, non-negative, every column sums to 1.

    Returns the table as float64. Raises :class:`ProbabilityError` naming the
    first offending column.
    """
    arr = np.asarray(table, dtype=np.float64)
    for problem in table_problems(arr):
        raise ProbabilityError(f"{name}: {problem}")
    return arr


def table_problems(arr: np.ndarray) -> list[str]:
    """List every violated conditional-table invariant of ``arr``."""
    if arr.ndim != 2:
        return [f"expected a 2-D table, got shape {arr.shape}"]
    problems = []
    if not np.all(np.isfinite(arr)):
        problems.append("non-finite entries")
        return problems
    for j in np.flatnonzero((arr < 0).any(axis=0)):
        problems.append(f"column {j} has negative entries")
    sums = arr.sum(axis=0)
    for j in np.flatnonzero(np.abs(sums - 1.0) > NORM_TOL):
        problems.append(f"column {j} sums to {sums[j]:.12g}, not 1")
    return problems


def normalize(raw) -> np.ndarray:
    """Scale a non-negative vector so that it sums to one."""
    arr = np.asarray(raw, dtype=np.float64)
    if arr.ndim != 1 or arr.size < 1:
        raise ProbabilityError(f"normalize: expected a non-empty 1-D vector, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ProbabilityError("normalize: non-finite entries")
    if np.any(arr < 0):
        raise ProbabilityError("normalize: negative entries")
    total = arr.sum()
    if total <= 0:
        raise ProbabilityError("normalize: all entries are zero")
    # Vectors already summing to one within rounding are returned as they
    # are, which makes normalize exactly idempotent.
    out = arr.copy()
    for _ in range(4):
        if abs(total - 1.0) <= _IDEMPOTENT_TOL:
            break
        out = out / total
        total = out.sum()
    return out


def log_floor(x) -> np.ndarray:
    """``ln max(x, LOG_FLOOR)`` elementwise."""
    return np.log(np.maximum(x, LOG_FLOOR))


def entropy(p) -> float:
    """Shannon entropy ``-sum p ln p`` with ``0 ln 0 = 0``."""
    p = as_categorical(p)
    nz = p[p > ZERO_MASS]
    return float(max(0.0, -np.sum(nz * np.log(nz))))


def kl_divergence(q, p) -> float:
    """``KL(q || p)``; raises if ``q`` puts mass where ``p`` has none."""
    q = as_categorical(q, "q")
    p = as_categorical(p, "p")
    if q.shape != p.shape:
        raise ProbabilityError(f"kl_divergence: support sizes differ ({q.size} vs {p.size})")
    support = q > 0
    bad = support & (p <= 0)
    if np.any(bad):
        raise ProbabilityError(
            f"kl_divergence: infinite divergence, q > 0 where p = 0 at {np.flatnonzero(bad).tolist()}"
        )
    qs, ps = q[support], p[support]
    return float(np.sum(qs * (np.log(qs) - np.log(ps))))


def softmax(values, precision: float = 1.0) -> np.ndarray:
    """Numerically stable ``exp(precision * v) / sum exp(precision * v)``."""
    if not precision > 0:
        raise ProbabilityError(f"softmax: precision must be positive, got {precision}")
    v = np.asarray(values, dtype=np.float64)
    if v.ndim != 1 or v.size < 1:
        raise ProbabilityError("softmax: expected a non-empty 1-D vector")
    if not np.all(np.isfinite(v)):
        raise ProbabilityError("softmax: non-finite values")
    z = precision * v
    z = z - z.max()
    e = np.exp(z)
    return e / e.sum()


def log_normalize(log_values) -> np.ndarray:
    """Shift a log-vector so that its exponential sums to one."""
    v = np.asarray(log_values, dtype=np.float64)
    m = v.max()
    return v - (m + np.log(np.sum(np.exp(v - m))))


def joint_entropy(ps: Sequence) -> float:
    """Entropy of a product of independent categoricals (sum of entropies)."""
    if len(ps) == 0:
        raise ProbabilityError("joint_entropy: empty factor list")
    return float(sum(entropy(p) for p in ps))


def outer_product(factors: Sequence[np.ndarray]) -> np.ndarray:
    """Flattened (row-major) product distribution of independent factors."""
    joint = np.ones(1)
    for f in factors:
        joint = np.outer(joint, f).ravel()
    return joint
