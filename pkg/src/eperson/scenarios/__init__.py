"""Simulated environments and their wiring to agents."""

from __future__ import annotations

import inspect

from . import custom, intersection, public_goods, signaling, tmaze
from .base import Scenario, ScenarioError, ScriptedAgent
from .runner import run_episode


def _public_goods_norm(seed=None, **kw):
    return public_goods.make(seed, norm_context=True, **kw)


def _public_goods(seed=None, **kw):
    return public_goods.make(seed, norm_context=False, **kw)


BUILDERS = {
    "tmaze": tmaze.make,
    "signaling": signaling.make,
    "public-goods": _public_goods,
    "public-goods-norm": _public_goods_norm,
    "intersection": intersection.make,
    "custom": custom.make,
}
SCENARIOS = tuple(BUILDERS)
_TARGETS = {
    "public-goods": public_goods.make,
    "public-goods-norm": public_goods.make,
}
_FIXED = {"public-goods": {"norm_context"}, "public-goods-norm": {"norm_context"}}


def scenario_parameters(name: str) -> dict:
    """Overridable parameters of a scenario and their default values."""
    if name not in BUILDERS:
        raise ScenarioError(f"unknown scenario {name!r}; known: {', '.join(SCENARIOS)}")
    fn = _TARGETS.get(name, BUILDERS[name])
    skip = {"seed"} | _FIXED.get(name, set())
    return {k: p.default for k, p in inspect.signature(fn).parameters.items() if k not in skip}


def make_scenario(name: str, seed=None, **overrides) -> Scenario:
    """Build a fully wired scenario; unknown names and parameters are errors."""
    allowed = scenario_parameters(name)
    unknown = sorted(set(overrides) - set(allowed))
    if unknown:
        raise ScenarioError(f"scenario {name!r} has no parameter(s) {', '.join(unknown)}")
    sc = BUILDERS[name](seed, **overrides)
    sc.check_alphabets()
    return sc


__all__ = ["Scenario", "ScenarioError", "ScriptedAgent", "SCENARIOS", "make_scenario", "run_episode",
           "scenario_parameters"]
