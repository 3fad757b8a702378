"""Synchronized episode loop producing trace records."""

from __future__ import annotations

import numpy as np

from ..social import AgentStep, broadcast_context, step_context, step_second_person
from ..trace import PolicyRow, TraceRecord
from ..uncertainty import ContextSnapshot, matrix
from .base import Scenario

THEY = "they"


def _beliefs(agent) -> dict:
    b = agent.belief
    out = {label: [float(x) for x in f] for label, f in zip(b.labels, b.factors)}
    high = getattr(agent, "high_belief", None)
    if high is not None:
        out["high"] = [float(x) for x in high.self_factor]
    return out


def make_record(run_id: str, t: int, agent_id: str, agent, step: AgentStep, context=None) -> TraceRecord:
    d = step.decision
    policies = []
    if d is not None and d.plan is not None:
        policies = [PolicyRow(list(e.policy.controls), e.efe, e.epistemic, e.pragmatic) for e in d.plan.evaluations]
    ctx = ContextSnapshot.of(context) if context is not None else None
    u = matrix(agent.snapshot(), ctx).to_dict()
    return TraceRecord(
        run_id=run_id,
        t=t,
        agent=agent_id,
        control=None if d is None else int(d.control),
        obs=None if step.obs is None else int(step.obs),
        beliefs=_beliefs(agent),
        free_energy=None if step.result is None else float(step.result.free_energy),
        policies=policies,
        uncertainty=u,
        valence=None if d is None or d.valence is None else float(d.valence),
    )


TERMINATED, STEP_LIMIT = "terminated", "step_limit"


class EpisodeStream:
    """Iterable over an episode's records, produced lazily round by round.

    Emits one initial record per agent (t = 0) and one per agent per round
    until the environment reports termination or ``max_steps`` rounds have
    run. After exhaustion ``outcome`` says which of the two happened. All
    randomness comes from a single generator seeded with ``seed``.
    """

    def __init__(self, scenario: Scenario, max_steps: int, seed: int, run_id: str | None = None):
        if max_steps < 0:
            raise ValueError("max_steps must be non-negative")
        self.scenario = scenario
        self.max_steps = max_steps
        self.seed = seed
        self.run_id = run_id or f"{scenario.name}-seed{seed}"
        self.outcome: str | None = None
        self.steps = 0

    def __iter__(self):
        sc, run_id = self.scenario, self.run_id
        rng = np.random.default_rng(self.seed)
        ctx = sc.context

        if ctx is not None:
            ctx.they.reset()
            (they_obs,) = sc.context_env.reset(rng)
        for a in sc.agents:
            a.reset()
        initial = sc.env.reset(rng)

        if ctx is not None:
            res = ctx.they.observe(they_obs) if they_obs is not None else None
            yield make_record(run_id, 0, THEY, ctx.they, AgentStep(None, they_obs, res))
            broadcast_context(sc.agents, ctx)
        for agent_id, a, o in zip(sc.agent_ids, sc.agents, initial):
            res = a.observe(o) if o is not None else None
            yield make_record(run_id, 0, agent_id, a, AgentStep(None, o, res), ctx)

        self.outcome = STEP_LIMIT
        for t in range(1, self.max_steps + 1):
            if ctx is not None:
                they_step = step_context(ctx, sc.context_env, rng)
                yield make_record(run_id, t, THEY, ctx.they, they_step)
                broadcast_context(sc.agents, ctx)
            steps, done = step_second_person(sc.agents, sc.env, rng)
            self.steps = t
            for agent_id, a, s in zip(sc.agent_ids, sc.agents, steps):
                yield make_record(run_id, t, agent_id, a, s, ctx)
            if done:
                self.outcome = TERMINATED
                break


def run_episode(scenario: Scenario, max_steps: int, seed: int, run_id: str | None = None) -> list[TraceRecord]:
    """Run a whole episode and return its records (see :class:`EpisodeStream`)."""
    return list(EpisodeStream(scenario, max_steps, seed, run_id))
