"""T-maze with a cue arm.

Locations: 0 centre, 1 left arm, 2 right arm, 3 cue. The context says which
arm is baited (0 = left, 1 = right). Observations are (position, stimulus)
with stimulus 0 none, 1 reward, 2 cue signal: the cue location shows the cue
signal in context 0 and nothing in context 1. Arms are absorbing.
"""

from __future__ import annotations

import numpy as np

from ..agent import FirstPersonAgent
from ..hierarchy import ContextBinding, HierarchicalAgent, summary_likelihood
from ..model import Factor, GenerativeModel, Policy, SELF, enumerate_policies, identity_transitions
from .base import Scenario

CENTER, LEFT, RIGHT, CUE = range(4)
NONE, REWARD, CUE_SIGNAL = range(3)
N_LOC, N_STIM, N_CTX = 4, 3, 2


def obs_index(position: int, stimulus: int) -> int:
    return position * N_STIM + stimulus


def state_index(location: int, context: int) -> int:
    return location * N_CTX + context


def _stimulus(location: int, context: int) -> int:
    if location == CUE:
        return CUE_SIGNAL if context == 0 else NONE
    if location in (LEFT, RIGHT):
        return REWARD if location - 1 == context else NONE
    return NONE


def _next_location(location: int, control: int) -> int:
    return location if location in (LEFT, RIGHT) else control


def observation_model(reward_probability: float = 0.98) -> np.ndarray:
    a = np.zeros((N_LOC * N_STIM, N_LOC * N_CTX))
    for loc in range(N_LOC):
        for ctx in range(N_CTX):
            s = state_index(loc, ctx)
            if loc in (LEFT, RIGHT):
                p = reward_probability if loc - 1 == ctx else 1 - reward_probability
                a[obs_index(loc, REWARD), s] = p
                a[obs_index(loc, NONE), s] = 1 - p
            else:
                a[obs_index(loc, _stimulus(loc, ctx)), s] = 1.0
    return a


def transition_model() -> list[np.ndarray]:
    slices = []
    for u in range(N_LOC):
        b = np.zeros((N_LOC * N_CTX, N_LOC * N_CTX))
        for loc in range(N_LOC):
            for ctx in range(N_CTX):
                b[state_index(_next_location(loc, u), ctx), state_index(loc, ctx)] = 1.0
        slices.append(b)
    return slices


def preferences(reward_preference: float = 3.0) -> np.ndarray:
    c = np.zeros(N_LOC * N_STIM)
    for arm in (LEFT, RIGHT):
        c[obs_index(arm, REWARD)] = reward_preference
        c[obs_index(arm, NONE)] = -reward_preference
    return c


def context_prior(context_weights) -> np.ndarray:
    d = np.zeros(N_LOC * N_CTX)
    for ctx, w in enumerate(context_weights):
        d[state_index(CENTER, ctx)] = w
    return d


def lower_model(reward_probability=0.98, reward_preference=3.0, horizon=2, d_prior=None) -> GenerativeModel:
    if d_prior is None:
        d_prior = context_prior([0.5, 0.5])
    return GenerativeModel(
        a_obs=observation_model(reward_probability),
        b_trans=transition_model(),
        c_pref=preferences(reward_preference),
        d_prior=(d_prior,),
        policies=tuple(enumerate_policies(N_LOC, horizon)),
        factors=(Factor(SELF, N_LOC * N_CTX, "location x context"),),
    )


def hierarchical_agent(contexts: int = 2, reward_probability=0.98, reward_preference=3.0, horizon=2,
                       summary_reliability=0.99, precision=4.0, action_mode="deterministic") -> HierarchicalAgent:
    low = lower_model(reward_probability, reward_preference, horizon)
    c = preferences(reward_preference)
    if contexts == 2:
        bindings = [ContextBinding(context_prior(np.eye(2)[k]), c) for k in range(2)]
        high_a = summary_likelihood(low.a_obs, N_CTX, summary_reliability)
    elif contexts == 1:
        bindings = [ContextBinding(context_prior([0.5, 0.5]), c)]
        high_a = np.full((low.num_states, 1), 1.0 / low.num_states)
    else:
        raise ValueError("the T-maze supports 1 or 2 contexts")
    high = GenerativeModel(
        a_obs=high_a,
        b_trans=identity_transitions(contexts),
        c_pref=np.zeros(low.num_states),
        d_prior=(np.full(contexts, 1.0 / contexts),),
        policies=(Policy((0,)),),
        factors=(Factor(SELF, contexts, "context"),),
    )
    return HierarchicalAgent(high, low, bindings, precision=precision, action_mode=action_mode, name="rat")


class TMazeEnv:
    num_agents = 1
    num_obs = N_LOC * N_STIM
    num_controls = N_LOC

    def __init__(self, context: int | None = None):
        self.fixed_context = context
        self.location = CENTER
        self.context = 0

    def reset(self, rng):
        self.location = CENTER
        self.context = int(rng.integers(N_CTX)) if self.fixed_context is None else self.fixed_context
        return [None]

    def observe(self) -> int:
        return obs_index(self.location, _stimulus(self.location, self.context))

    def step(self, controls):
        self.location = _next_location(self.location, int(controls[0]))
        return [self.observe()], False


def make(seed=None, hierarchical=True, contexts=2, reward_probability=0.98, reward_preference=3.0,
         horizon=2, summary_reliability=0.99, precision=4.0, action_mode="deterministic", context=None) -> Scenario:
    if hierarchical:
        agent = hierarchical_agent(contexts, reward_probability, reward_preference, horizon,
                                   summary_reliability, precision, action_mode)
    else:
        agent = FirstPersonAgent(lower_model(reward_probability, reward_preference, horizon),
                                 precision, action_mode, name="rat")
    params = dict(hierarchical=hierarchical, contexts=contexts, reward_probability=reward_probability,
                  reward_preference=reward_preference, horizon=horizon, summary_reliability=summary_reliability)
    return Scenario("tmaze", "first", TMazeEnv(context), [agent], ["rat"], params=params)
