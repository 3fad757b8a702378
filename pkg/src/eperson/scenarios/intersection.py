"""Four agents crossing a 5x5 grid through its centre cell.

Each agent starts mid-edge and drives straight to the opposite edge. Its
progress is the number of cells it has advanced (0 to 4); at 4 it has
arrived and leaves the grid. Two active agents in one cell is a collision
and ends the episode. Perpendicular routes share only the centre; opposite
routes share the whole lane, so head-on partners must pass on odd gaps.

Each agent models itself and one representative other as two progress
factors. It observes its own progress exactly, the occupancy of its four
neighbouring cells (front, back, left, right) and a collision flag.
"""

from __future__ import annotations

import numpy as np

from ..model import Factor, GenerativeModel, OTHER, SELF, enumerate_policies
from ..social import PREDICT, CoupledAgent
from .base import Scenario, ScriptedAgent

SIZE = 5
CENTER = 2
ARRIVED = SIZE - 1
N_PROGRESS = SIZE
FORWARD, WAIT = 0, 1
FRONT, BACK, LEFT, RIGHT = 0, 1, 2, 3
N_BITS = 16

# start cell and heading (row, col) for the agents entering from N, E, S, W
ROUTES = (
    ((0, CENTER), (1, 0)),
    ((CENTER, SIZE - 1), (0, -1)),
    ((SIZE - 1, CENTER), (-1, 0)),
    ((CENTER, 0), (0, 1)),
)
AGENT_IDS = ("north", "east", "south", "west")


def obs_index(progress: int, bits: int, collision: int) -> int:
    return (progress * N_BITS + bits) * 2 + collision


def decode_obs(o: int) -> tuple[int, int, int]:
    rest, collision = divmod(o, 2)
    progress, bits = divmod(rest, N_BITS)
    return progress, bits, collision


def progress_transitions(slip: float = 0.0) -> tuple[np.ndarray, np.ndarray]:
    """Forward advances one cell except with probability ``slip``; wait stays."""
    fwd = np.zeros((N_PROGRESS, N_PROGRESS))
    for p in range(N_PROGRESS):
        fwd[min(p + 1, ARRIVED), p] += 1.0 - slip
        fwd[p, p] += slip
    return fwd, np.eye(N_PROGRESS)


def _geometry(p: int, q: int, head_on: bool) -> tuple[list[bool], bool]:
    """Neighbour occupancy and collision for own progress ``p`` and other
    progress ``q``, for an opposite-lane or a crossing-lane other."""
    bits = [False] * 4
    if p == ARRIVED or q == ARRIVED:
        return bits, False
    if head_on:
        # the other sits at my progress 4 - q along my own lane
        bits[FRONT] = p + q == ARRIVED - 1
        bits[BACK] = p + q == ARRIVED + 1
        return bits, p + q == ARRIVED
    bits[FRONT] = p == CENTER - 1 and q == CENTER
    bits[BACK] = p == CENTER + 1 and q == CENTER
    side = p == CENTER and q in (CENTER - 1, CENTER + 1)
    bits[LEFT] = bits[RIGHT] = side
    return bits, p == q == CENTER


def _likelihood(p: int, q: int, head_on: bool, reliability: float, noise: float,
                collision_reliability: float, collision_noise: float) -> np.ndarray:
    bits, crash = _geometry(p, q, head_on)
    probs = [reliability if b else noise for b in bits]
    if bits[LEFT] and bits[RIGHT]:
        # beside me on one side only; which side is unknown
        probs[LEFT] = probs[RIGHT] = 0.5 * reliability
    p_col = collision_reliability if crash else collision_noise
    out = np.zeros(N_BITS * 2)
    for b in range(N_BITS):
        pb = 1.0
        for k in range(4):
            pb *= probs[k] if b >> k & 1 else 1 - probs[k]
        out[b * 2 + 1] = pb * p_col
        out[b * 2] = pb * (1 - p_col)
    return out


def agent_model(reliability: float = 0.9, noise: float = 0.05, collision_reliability: float = 0.95,
                collision_noise: float = 0.01, progress_reward: float = 1.0, collision_cost: float = 12.0,
                horizon: int = 2, slip: float = 0.3, head_on_weight: float = 0.0) -> GenerativeModel:
    """The other factor stands for one representative other agent. Its
    observation model mixes the opposite-lane geometry (weight
    ``head_on_weight``) with the crossing-lane geometry; the default treats
    every other as crossing."""
    n_obs = N_PROGRESS * N_BITS * 2
    a = np.zeros((n_obs, N_PROGRESS, N_PROGRESS))
    args = (reliability, noise, collision_reliability, collision_noise)
    for p in range(N_PROGRESS):
        for q in range(N_PROGRESS):
            lik = (head_on_weight * _likelihood(p, q, True, *args)
                   + (1 - head_on_weight) * _likelihood(p, q, False, *args))
            a[p * N_BITS * 2:(p + 1) * N_BITS * 2, p, q] = lik
    c = np.zeros(n_obs)
    for o in range(n_obs):
        p, _, col = decode_obs(o)
        c[o] = progress_reward * p - collision_cost * col
    d = np.zeros(N_PROGRESS)
    d[0] = 1.0
    return GenerativeModel(
        a_obs=a.reshape(n_obs, -1),
        b_trans=progress_transitions(slip),
        c_pref=c,
        d_prior=(d, d.copy()),
        policies=tuple(enumerate_policies(2, horizon)),
        factors=(Factor(SELF, N_PROGRESS, "progress"), Factor(OTHER, N_PROGRESS, "other progress")),
    )


class IntersectionEnv:
    num_agents = len(ROUTES)
    num_obs = N_PROGRESS * N_BITS * 2
    num_controls = 2

    def __init__(self):
        self.progress = [0] * self.num_agents
        self.collided = False

    def _cell(self, i: int) -> tuple[int, int]:
        (r, c), (dr, dc) = ROUTES[i]
        p = self.progress[i]
        return r + p * dr, c + p * dc

    def _active(self, i: int) -> bool:
        return self.progress[i] < ARRIVED

    def occupied(self) -> dict:
        cells: dict = {}
        for i in range(self.num_agents):
            if self._active(i):
                cells.setdefault(self._cell(i), []).append(i)
        return cells

    def reset(self, rng):
        self.progress = [0] * self.num_agents
        self.collided = False
        return self._obs(set())

    def _obs(self, crashed: set) -> list[int]:
        cells = self.occupied()
        out = []
        for i in range(self.num_agents):
            (r, c) = self._cell(i)
            dr, dc = ROUTES[i][1]
            neighbours = ((r + dr, c + dc), (r - dr, c - dc), (r - dc, c + dr), (r + dc, c - dr))
            bits = 0
            if self._active(i):
                for k, cell in enumerate(neighbours):
                    if any(j != i for j in cells.get(cell, ())):
                        bits |= 1 << k
            out.append(obs_index(self.progress[i], bits, int(i in crashed)))
        return out

    def step(self, controls):
        for i, u in enumerate(controls):
            if u == FORWARD and self._active(i):
                self.progress[i] += 1
        crashed = {i for group in self.occupied().values() if len(group) > 1 for i in group}
        self.collided = self.collided or bool(crashed)
        done = bool(crashed) or not any(self._active(i) for i in range(self.num_agents))
        return self._obs(crashed), done


def make(seed=None, baseline=False, precision=1.0, action_mode="sample", coupling=PREDICT,
         horizon=2, collision_cost=12.0, progress_reward=1.0, slip=0.3, head_on_weight=0.0,
         other_models=None) -> Scenario:
    model = agent_model(progress_reward=progress_reward, collision_cost=collision_cost, horizon=horizon,
                        slip=slip, head_on_weight=head_on_weight)
    others = other_models or [None] * len(ROUTES)
    agents = []
    for i, name in enumerate(AGENT_IDS):
        a = CoupledAgent(model, others[i], 0.0, precision, action_mode, coupling, name=name)
        agents.append(ScriptedAgent(a, FORWARD) if baseline else a)
    params = dict(baseline=baseline, precision=precision, horizon=horizon, collision_cost=collision_cost)
    return Scenario("intersection", "second", IntersectionEnv(), agents, list(AGENT_IDS), params=params)
