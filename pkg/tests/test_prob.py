import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from eperson.prob import (
    ProbabilityError,
    entropy,
    is_categorical,
    joint_entropy,
    kl_divergence,
    normalize,
    outer_product,
    softmax,
)
from oracles import entropy_direct, kl_direct

weights = st.lists(st.floats(0.0, 10.0, allow_nan=False), min_size=1, max_size=8).filter(lambda v: sum(v) > 1e-6)


def test_normalize_examples():
    assert np.allclose(normalize([2, 2]), [0.5, 0.5])
    assert np.array_equal(normalize([1, 0, 0]), [1.0, 0.0, 0.0])
    assert np.allclose(normalize([1, 3]), [0.25, 0.75], atol=1e-15)


@pytest.mark.parametrize("bad", [[0, 0], [1, -1], [], [np.nan, 1]])
def test_normalize_rejects(bad):
    with pytest.raises(ProbabilityError):
        normalize(bad)


@given(weights)
def test_normalize_idempotent(v):
    once = normalize(v)
    assert np.array_equal(normalize(once), once)
    assert is_categorical(once)


def test_entropy_examples():
    assert entropy([0.25] * 4) == pytest.approx(math.log(4), abs=1e-12)
    assert entropy([1.0, 0.0]) == 0.0
    assert entropy([0.25, 0.75]) == pytest.approx(0.562335, abs=1e-6)
    assert entropy([0.25, 0.75]) == pytest.approx(entropy_direct([0.25, 0.75]), abs=1e-15)


@given(weights)
def test_entropy_bounds(v):
    p = normalize(v)
    h = entropy(p)
    assert -1e-15 <= h <= math.log(len(p)) + 1e-12


def test_kl_examples():
    assert kl_divergence([0.3, 0.7], [0.3, 0.7]) == 0.0
    assert kl_divergence([1, 0], [0.5, 0.5]) == pytest.approx(math.log(2), abs=1e-12)
    assert kl_divergence([0.5, 0.5], [0.25, 0.75]) == pytest.approx(0.143841, abs=1e-6)


def test_kl_rejects_mismatch_and_infinite():
    with pytest.raises(ProbabilityError):
        kl_divergence([0.5, 0.5], [1 / 3] * 3)
    with pytest.raises(ProbabilityError):
        kl_divergence([0.5, 0.5], [1.0, 0.0])


@settings(max_examples=200)
@given(weights, st.integers(0, 2**31 - 1))
def test_kl_nonnegative_and_matches_direct_sum(v, seed):
    q = normalize(v)
    p = np.random.default_rng(seed).dirichlet(np.ones(len(q)))
    d = kl_divergence(q, p)
    assert d >= -1e-12
    assert d == pytest.approx(kl_direct(q, p), abs=1e-10)
    assert kl_divergence(q, q) == pytest.approx(0.0, abs=1e-12)


def test_softmax_examples():
    assert np.allclose(softmax([3.0, 3.0, 3.0], 7.0), [1 / 3] * 3)
    assert np.allclose(softmax([0.0, math.log(2)], 1.0), [1 / 3, 2 / 3], atol=1e-15)
    assert np.allclose(softmax([0.0, 10.0], 100.0), [0.0, 1.0], atol=1e-12)


@given(st.lists(st.floats(-50, 50), min_size=1, max_size=6), st.floats(0.01, 20), st.floats(-100, 100))
def test_softmax_valid_and_shift_invariant(v, precision, shift):
    p = softmax(v, precision)
    assert is_categorical(p)
    assert np.allclose(p, softmax(np.asarray(v) + shift, precision), atol=1e-9)


def test_joint_entropy_examples():
    assert joint_entropy([[0.5, 0.5], [0.5, 0.5]]) == pytest.approx(2 * math.log(2), abs=1e-12)
    assert joint_entropy([[1.0, 0.0], [0.2, 0.3, 0.5]]) == pytest.approx(entropy([0.2, 0.3, 0.5]), abs=1e-15)
    assert joint_entropy([[0.25, 0.75], [0.5, 0.5]]) == pytest.approx(1.255482, abs=1e-6)
    with pytest.raises(ProbabilityError):
        joint_entropy([])


def test_joint_entropy_equals_entropy_of_product():
    ps = [normalize([1, 2, 3]), normalize([4, 1])]
    assert joint_entropy(ps) == pytest.approx(entropy(outer_product(ps)), abs=1e-12)
