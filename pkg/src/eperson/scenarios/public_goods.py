"""Two-player public goods game with costly punishment.

Controls: 0 contribute+penalize, 1 contribute+abstain, 2 keep+penalize,
3 keep+abstain. Each round both players hold an endowment of 1.0; the pot is
multiplied by 1.6 and split evenly; penalizing costs the punisher 0.2 and
fines the punished 0.8. Money is tracked in integer tenths so that payoff
bins are exact.

Each player observes its own control, the partner's control (noisy in the
player's model) and its own payoff bin. With a norm context, a third party's
state (0 lenient, 1 strict) decides whether free riding draws a sanction,
which the player also observes.
"""

from __future__ import annotations

import numpy as np

from ..agent import FirstPersonAgent
from ..model import (
    Factor,
    GenerativeModel,
    OTHER,
    Policy,
    SELF,
    SHARED,
    enumerate_policies,
    identity_transitions,
    set_state_transitions,
)
from ..social import PREDICT, CoupledAgent, SharedContext
from .base import Scenario

N_CTRL = 4
N_BINS = 5
CONTRIBUTE_PENALIZE, CONTRIBUTE, KEEP_PENALIZE, KEEP = range(N_CTRL)
ENDOWMENT, POT_SHARE, PENALTY_COST, FINE = 10, 8, 2, 8  # tenths; pot share = 1.6 / 2
LENIENT, STRICT = 0, 1


def contributes(u: int) -> int:
    return 1 if u in (CONTRIBUTE_PENALIZE, CONTRIBUTE) else 0


def penalizes(u: int) -> int:
    return 1 if u in (CONTRIBUTE_PENALIZE, KEEP_PENALIZE) else 0


def payoff_tenths(own: int, other: int) -> int:
    return (ENDOWMENT * (1 - contributes(own)) + POT_SHARE * (contributes(own) + contributes(other))
            - PENALTY_COST * penalizes(own) - FINE * penalizes(other))


def payoff(own: int, other: int) -> float:
    return payoff_tenths(own, other) / 10


def payoff_bin(own: int, other: int) -> int:
    # payoffs span [-0.2, 1.8]; five bins of width 0.4
    return min(N_BINS - 1, (payoff_tenths(own, other) + 2) // 4)


def obs_index(own: int, seen: int, bin_: int, sanction: int | None = None) -> int:
    base = (own * N_CTRL + seen) * N_BINS + bin_
    return base if sanction is None else base * 2 + sanction


def _model(norm: bool, accuracy: float, payoff_weight: float, sanction_cost: float,
           sanction_reliability: float) -> GenerativeModel:
    n_obs = N_CTRL * N_CTRL * N_BINS * (2 if norm else 1)
    n_shared = 2 if norm else 1
    a = np.zeros((n_obs, N_CTRL, N_CTRL, n_shared))
    for s in range(N_CTRL):
        for q in range(N_CTRL):
            b = payoff_bin(s, q)
            for seen in range(N_CTRL):
                p_seen = accuracy if seen == q else (1 - accuracy) / (N_CTRL - 1)
                for n in range(n_shared):
                    if not norm:
                        a[obs_index(s, seen, b), s, q, n] = p_seen
                        continue
                    free_riding = not contributes(s) and n == STRICT
                    p_sanc = sanction_reliability if free_riding else 1 - sanction_reliability
                    a[obs_index(s, seen, b, 1), s, q, n] = p_seen * p_sanc
                    a[obs_index(s, seen, b, 0), s, q, n] = p_seen * (1 - p_sanc)
    c = np.zeros(n_obs)
    for own in range(N_CTRL):
        for seen in range(N_CTRL):
            for b in range(N_BINS):
                value = payoff_weight * payoff(own, seen)
                if norm:
                    c[obs_index(own, seen, b, 0)] = value
                    c[obs_index(own, seen, b, 1)] = value - sanction_cost
                else:
                    c[obs_index(own, seen, b)] = value
    factors = [Factor(SELF, N_CTRL, "own last control"), Factor(OTHER, N_CTRL, "partner last control")]
    d = [np.full(N_CTRL, 1 / N_CTRL), np.full(N_CTRL, 1 / N_CTRL)]
    if norm:
        factors.append(Factor(SHARED, 2, "norm"))
        d.append(np.full(2, 0.5))
        a = a.reshape(n_obs, -1)
    else:
        a = a[..., 0].reshape(n_obs, -1)
    return GenerativeModel(a, set_state_transitions(N_CTRL), c, tuple(d),
                           tuple(enumerate_policies(N_CTRL, 1)), tuple(factors))


def coupled_model(norm: bool = False, accuracy: float = 0.95, payoff_weight: float = 2.0,
                  sanction_cost: float = 3.0, sanction_reliability: float = 0.9) -> GenerativeModel:
    return _model(norm, accuracy, payoff_weight, sanction_cost, sanction_reliability)


def they_model(signal_accuracy: float = 0.8) -> GenerativeModel:
    a = np.array([[signal_accuracy, 1 - signal_accuracy], [1 - signal_accuracy, signal_accuracy]])
    return GenerativeModel(a, identity_transitions(2), np.zeros(2), (np.full(2, 0.5),), (Policy((0,)),),
                           (Factor(SELF, 2, "norm"),))


class NormEnv:
    """The third party's own world: a fixed norm announced through a noisy
    public signal. Its random stream is derived once at reset."""

    num_agents = 1
    num_obs = 2
    num_controls = 1

    def __init__(self, norm: int | None = STRICT, signal_accuracy: float = 0.8):
        self.fixed_norm = norm
        self.signal_accuracy = signal_accuracy
        self.state = STRICT

    def reset(self, rng):
        child = int(rng.integers(2**63 - 1))
        self._rng = np.random.default_rng(child)
        self.state = int(self._rng.integers(2)) if self.fixed_norm is None else self.fixed_norm
        return [self._signal()]

    def _signal(self) -> int:
        return self.state if self._rng.random() < self.signal_accuracy else 1 - self.state

    def step(self, controls):
        return [self._signal()], False


class PublicGoodsEnv:
    num_agents = 2
    num_controls = N_CTRL

    def __init__(self, norm_env: NormEnv | None = None, initial=None):
        self.norm_env = norm_env
        self.num_obs = N_CTRL * N_CTRL * N_BINS * (1 if norm_env is None else 2)
        self.initial = initial
        self.last = [KEEP, KEEP]
        self.payoffs: list[tuple[float, float]] = []

    def reset(self, rng):
        if self.initial is None:
            self.last = [int(x) for x in rng.integers(N_CTRL, size=2)]
        else:
            self.last = list(self.initial)
        self.payoffs = []
        return self._obs()

    def _obs(self):
        u = self.last
        out = []
        for i in (0, 1):
            own, other = u[i], u[1 - i]
            b = payoff_bin(own, other)
            if self.norm_env is None:
                out.append(obs_index(own, other, b))
            else:
                sanction = int(not contributes(own) and self.norm_env.state == STRICT)
                out.append(obs_index(own, other, b, sanction))
        return out

    def step(self, controls):
        self.last = [int(c) for c in controls]
        self.payoffs.append((payoff(self.last[0], self.last[1]), payoff(self.last[1], self.last[0])))
        return self._obs(), False


def make(seed=None, w=0.0, norm_context=False, norm=STRICT, accuracy=0.95, payoff_weight=2.0,
         sanction_cost=3.0, sanction_reliability=0.9, signal_accuracy=0.8, precision=4.0,
         action_mode="deterministic", coupling=PREDICT, initial=None, other_models=None) -> Scenario:
    ws = list(w) if isinstance(w, (list, tuple)) else [w, w]
    model = coupled_model(norm_context, accuracy, payoff_weight, sanction_cost, sanction_reliability)
    others = other_models or [None, None]
    agents = [CoupledAgent(model, others[i], ws[i], precision, action_mode, coupling, name=n)
              for i, n in enumerate(("I", "You"))]
    params = dict(w=ws, accuracy=accuracy, payoff_weight=payoff_weight)
    if not norm_context:
        return Scenario("public-goods", "second", PublicGoodsEnv(initial=initial), agents, ["I", "You"],
                        params=params)
    norm_env = NormEnv(norm, signal_accuracy)
    context = SharedContext(FirstPersonAgent(they_model(signal_accuracy), precision, name="They"))
    params.update(norm=norm, sanction_cost=sanction_cost, sanction_reliability=sanction_reliability)
    return Scenario("public-goods-norm", "third", PublicGoodsEnv(norm_env, initial), agents, ["I", "You"],
                    context=context, context_env=norm_env, params=params)
