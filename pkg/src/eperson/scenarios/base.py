from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Protocol

import numpy as np

from ..agent import Decision
from ..social import SharedContext


class Environment(Protocol):
    num_agents: int

    def reset(self, rng: np.random.Generator) -> list:
        """Draw the initial true state; return each agent's initial
        observation (``None`` when nothing is visible before the first round)."""

    def step(self, controls) -> tuple[list, bool]:
        """Apply joint controls; return per-agent observations and a done flag."""


class ScenarioError(ValueError):
    pass


@dataclass
class Scenario:
    name: str
    topology: str
    env: Any
    agents: list
    agent_ids: list
    context: SharedContext | None = None
    context_env: Any = None
    params: dict = field(default_factory=dict)

    @property
    def num_agents(self) -> int:
        return len(self.agents)

    def check_alphabets(self) -> None:
        """Every agent model must speak its environment's alphabets."""
        pairs = [(self.env, a, i) for i, a in zip(self.agent_ids, self.agents)]
        if self.context is not None:
            pairs.append((self.context_env, self.context.they, "they"))
        if len(self.agents) != getattr(self.env, "num_agents", len(self.agents)):
            raise ScenarioError(f"{self.name}: environment expects {self.env.num_agents} agents, "
                                f"got {len(self.agents)}")
        for env, agent, agent_id in pairs:
            m = agent.model
            if m.num_obs != env.num_obs or m.num_controls != env.num_controls:
                raise ScenarioError(
                    f"{self.name}: agent {agent_id} model has {m.num_obs} observations and "
                    f"{m.num_controls} controls, environment has {env.num_obs} and {env.num_controls}")


class ScriptedAgent:
    """Wraps an agent but always emits the same control (baselines)."""

    def __init__(self, inner, control: int):
        self.inner = inner
        self.control = control
        self.kind = getattr(inner, "kind", "first")

    def __getattr__(self, name):
        return getattr(self.inner, name)

    def reset(self):
        self.inner.reset()

    def decide(self, rng=None) -> Decision:
        return Decision(self.control, None)

    def observe(self, obs, control=None):
        return self.inner.observe(obs, control)

    def snapshot(self):
        return self.inner.snapshot()
