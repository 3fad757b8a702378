"""Two agents displaying a binary posture; each sees its own posture exactly
and the partner's through a noisy channel, and prefers to match the partner.

Coupling defaults to ``"static"``. Under ``"predict"`` each agent expects
the partner to adapt to it, so a mismatched pair can stall with both sides
holding a near-certain but wrong prediction of the other.
"""

from __future__ import annotations

import numpy as np

from ..model import Factor, GenerativeModel, OTHER, SELF, enumerate_policies, set_state_transitions
from ..social import STATIC, CoupledAgent
from .base import Scenario

N = 2


def obs_index(own: int, seen: int) -> int:
    return own * N + seen


def coupled_model(accuracy: float = 0.9, match_preference: float = 1.0, decoupled: bool = False) -> GenerativeModel:
    a = np.zeros((N * N, N, N))
    for s in range(N):
        for q in range(N):
            for seen in range(N):
                if decoupled:
                    p = 1.0 / N
                else:
                    p = accuracy if seen == q else (1 - accuracy) / (N - 1)
                a[obs_index(s, seen), s, q] = p
    c = np.array([match_preference if own == seen else -match_preference
                  for own in range(N) for seen in range(N)])
    return GenerativeModel(
        a_obs=a.reshape(N * N, N * N),
        b_trans=set_state_transitions(N),
        c_pref=c,
        d_prior=(np.full(N, 1 / N), np.full(N, 1 / N)),
        policies=tuple(enumerate_policies(N, 1)),
        factors=(Factor(SELF, N, "posture"), Factor(OTHER, N, "partner posture")),
    )


class SignalingEnv:
    num_agents = 2
    num_obs = N * N
    num_controls = N

    def __init__(self, initial=None):
        self.initial = initial
        self.postures = [0, 0]

    def reset(self, rng):
        if self.initial is None:
            self.postures = [int(x) for x in rng.integers(N, size=2)]
        else:
            self.postures = list(self.initial)
        return [None] * N

    def _obs(self):
        p = self.postures
        return [obs_index(p[0], p[1]), obs_index(p[1], p[0])]

    def step(self, controls):
        self.postures = [int(c) for c in controls]
        return self._obs(), False


def make(seed=None, w=0.0, accuracy=0.9, match_preference=1.0, decoupled=False, precision=4.0,
         action_mode="deterministic", coupling=STATIC, initial=None, other_models=None) -> Scenario:
    ws = list(w) if isinstance(w, (list, tuple)) else [w, w]
    model = coupled_model(accuracy, match_preference, decoupled)
    others = other_models or [None, None]
    agents = [CoupledAgent(model, others[i], ws[i], precision, action_mode, coupling, name=n)
              for i, n in enumerate(("I", "You"))]
    params = dict(w=ws, accuracy=accuracy, match_preference=match_preference, decoupled=decoupled)
    return Scenario("signaling", "second", SignalingEnv(initial), agents, ["I", "You"], params=params)
