"""Reference computations written independently of the library code paths.

They use explicit loops and Bayes' rule rather than the vectorized entropy
routes inside the package.
"""

from __future__ import annotations

import itertools
import math

import numpy as np


def entropy_direct(p) -> float:
    return -sum(x * math.log(x) for x in p if x > 0)


def kl_direct(q, p) -> float:
    return sum(a * math.log(a / b) for a, b in zip(q, p) if a > 0)


def bayes_posterior(a, prior, obs):
    """Single-factor posterior and evidence by direct summation."""
    joint = [a[obs][s] * prior[s] for s in range(len(prior))]
    z = sum(joint)
    return [j / z for j in joint], z


def joint_posterior_marginals(a_tensor, priors, obs):
    """Exact joint Bayes over every factor configuration, then marginals."""
    sizes = [len(p) for p in priors]
    post = np.zeros(sizes)
    for cfg in itertools.product(*(range(n) for n in sizes)):
        w = a_tensor[(obs,) + cfg]
        for k, s in enumerate(cfg):
            w *= priors[k][s]
        post[cfg] = w
    post /= post.sum()
    marg = []
    for k in range(len(sizes)):
        axes = tuple(i for i in range(len(sizes)) if i != k)
        marg.append(post.sum(axis=axes))
    return marg


def efe_by_sequence_enumeration(a, b_slices, c_log, q0, controls):
    """G of one policy over a single-factor model.

    Every observation sequence is enumerated with its predictive probability
    (the product of per-step predictive marginals, with no re-conditioning on
    earlier outcomes). For each sequence the information gain of every step
    is computed by Bayes' rule and the log-preference is accumulated.
    Returns ``(efe, epistemic, pragmatic)``.
    """
    n_obs = len(a)
    states = []
    q = list(q0)
    for u in controls:
        b = b_slices[u]
        q = [sum(b[i][j] * q[j] for j in range(len(q))) for i in range(len(q))]
        z = sum(q)
        q = [x / z for x in q]
        states.append(q)
    preds = []
    for q in states:
        p_o = [sum(a[o][s] * q[s] for s in range(len(q))) for o in range(n_obs)]
        preds.append(p_o)
    epi = prag = 0.0
    for seq in itertools.product(range(n_obs), repeat=len(controls)):
        w = 1.0
        for tau, o in enumerate(seq):
            w *= preds[tau][o]
        if w == 0:
            continue
        for tau, o in enumerate(seq):
            post, z = bayes_posterior(a, states[tau], o)
            epi += w * kl_direct(post, states[tau])
            prag += w * c_log[o]
    return -(epi + prag), epi, prag


def random_categorical(rng, n, alpha=1.0):
    return rng.dirichlet(np.full(n, alpha))


def random_table(rng, rows, cols, alpha=1.0):
    return rng.dirichlet(np.full(rows, alpha), size=cols).T
