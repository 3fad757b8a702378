"""Run configuration: a JSON document with a fixed set of keys.

Minimal form::

    {"scenario": "tmaze", "seed": 7}

Full form, with defaults shown where one exists::

    {
      "scenario": "public-goods",
      "seed": 0,
      "max_steps": 20,
      "agent": {"w": 0.25, "precision": 4.0, "horizon": null, "policy_cap": 1024},
      "params": {"accuracy": 0.95},
      "out": null,
      "export": {"metrics": ["u.level2.first", "G.min"]},
      "sweep": {"seeds": "0-99", "workers": 1}
    }

``agent`` values left out keep the scenario's own defaults. ``params`` holds
any other scenario parameter. ``out`` falls back to ``$EPERSON_OUT_DIR`` and
then to ``runs``. Unknown keys anywhere are errors.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import asdict, dataclass, field, replace

from ..model import POLICY_CAP
from ..scenarios import SCENARIOS, ScenarioError, make_scenario, scenario_parameters

DEFAULT_MAX_STEPS = 20
DEFAULT_OUT = "runs"
OUT_ENV = "EPERSON_OUT_DIR"

TOP_KEYS = ("scenario", "seed", "max_steps", "agent", "params", "out", "export", "sweep")
AGENT_KEYS = ("w", "precision", "horizon", "policy_cap")
EXPORT_KEYS = ("metrics",)
SWEEP_KEYS = ("seeds", "workers")


class ConfigError(ValueError):
    def __init__(self, message: str, key: str | None = None, line: int | None = None, column: int | None = None):
        self.key, self.line, self.column = key, line, column
        where = f"line {line}, column {column}: " if line is not None else ""
        what = f"{key}: " if key else ""
        super().__init__(f"{where}{what}{message}")


@dataclass(frozen=True)
class AgentOverrides:
    w: float | None = None
    precision: float | None = None
    horizon: int | None = None
    policy_cap: int | None = None


@dataclass(frozen=True)
class SweepSpec:
    seeds: tuple = ()
    workers: int = 1


@dataclass(frozen=True)
class RunConfig:
    scenario: str
    seed: int
    max_steps: int = DEFAULT_MAX_STEPS
    agent: AgentOverrides = field(default_factory=AgentOverrides)
    params: dict = field(default_factory=dict)
    out: str | None = None
    metrics: tuple = ()
    sweep: SweepSpec | None = None

    def out_dir(self, override: str | None = None) -> str:
        return override or self.out or os.environ.get(OUT_ENV) or DEFAULT_OUT

    def scenario_kwargs(self) -> dict:
        kw = dict(self.params)
        for k in ("w", "precision", "horizon"):
            v = getattr(self.agent, k)
            if v is not None:
                kw[k] = v
        return kw

    def with_seed(self, seed: int) -> "RunConfig":
        return replace(self, seed=_unsigned(seed, "seed"))

    def to_dict(self) -> dict:
        d = {"scenario": self.scenario, "seed": self.seed, "max_steps": self.max_steps,
             "agent": {k: v for k, v in asdict(self.agent).items() if v is not None},
             "params": dict(self.params)}
        if self.out is not None:
            d["out"] = self.out
        if self.metrics:
            d["export"] = {"metrics": list(self.metrics)}
        if self.sweep is not None:
            d["sweep"] = {"seeds": list(self.sweep.seeds), "workers": self.sweep.workers}
        return d


def _is_int(v) -> bool:
    return isinstance(v, int) and not isinstance(v, bool)


def _is_number(v) -> bool:
    return (isinstance(v, (int, float)) and not isinstance(v, bool)) and math.isfinite(v)


def _unsigned(v, key: str) -> int:
    if not _is_int(v) or v < 0:
        raise ConfigError(f"must be a non-negative integer, got {v!r}", key)
    return v


def _strict(d, allowed, where: str) -> dict:
    if not isinstance(d, dict):
        raise ConfigError("must be an object", where or None)
    for k in d:
        if k not in allowed:
            prefix = f"{where}." if where else ""
            raise ConfigError(f"unknown key (allowed: {', '.join(allowed)})", prefix + k)
    return d


def parse_seeds(value, key: str = "sweep.seeds") -> tuple:
    """A list of seeds or an inclusive ``"a-b"`` range."""
    if isinstance(value, str):
        try:
            lo, hi = (int(x) for x in value.split("-", 1))
        except ValueError:
            raise ConfigError(f"expected 'first-last', got {value!r}", key) from None
        if lo < 0 or hi < lo:
            raise ConfigError(f"empty or negative range {value!r}", key)
        return tuple(range(lo, hi + 1))
    if isinstance(value, list) and value:
        return tuple(_unsigned(s, key) for s in value)
    raise ConfigError("must be a non-empty list of seeds or a 'first-last' range", key)


def _agent(d) -> AgentOverrides:
    d = _strict(d, AGENT_KEYS, "agent")
    w = d.get("w")
    if w is not None and (not _is_number(w) or not 0.0 <= w <= 1.0):
        raise ConfigError(f"must lie in [0,1], got {w!r}", "agent.w")
    prec = d.get("precision")
    if prec is not None and (not _is_number(prec) or prec <= 0):
        raise ConfigError(f"must be a positive number, got {prec!r}", "agent.precision")
    hz = d.get("horizon")
    if hz is not None and (not _is_int(hz) or hz < 1):
        raise ConfigError(f"must be an integer >= 1, got {hz!r}", "agent.horizon")
    cap = d.get("policy_cap")
    if cap is not None and (not _is_int(cap) or not 1 <= cap <= POLICY_CAP):
        raise ConfigError(f"must be an integer in [1,{POLICY_CAP}], got {cap!r}", "agent.policy_cap")
    return AgentOverrides(w, prec, hz, cap)


def _check_against_scenario(cfg: RunConfig) -> None:
    allowed = scenario_parameters(cfg.scenario)
    for k in ("w", "precision", "horizon"):
        if getattr(cfg.agent, k) is not None:
            if k not in allowed:
                raise ConfigError(f"scenario {cfg.scenario!r} does not take this override", f"agent.{k}")
            if k in cfg.params:
                raise ConfigError("set both in agent and in params", f"params.{k}")
    for k in cfg.params:
        if k not in allowed:
            raise ConfigError(f"scenario {cfg.scenario!r} has no such parameter "
                              f"(known: {', '.join(sorted(allowed))})", f"params.{k}")
    try:
        sc = make_scenario(cfg.scenario, cfg.seed, **cfg.scenario_kwargs())
    except (ScenarioError, ValueError, TypeError) as exc:
        raise ConfigError(str(exc), "params") from None
    cap = cfg.agent.policy_cap
    if cap is not None:
        for agent_id, a in zip(sc.agent_ids, sc.agents):
            n = len(a.model.policies)
            if n > cap:
                raise ConfigError(f"agent {agent_id} has {n} policies, above the cap of {cap}",
                                  "agent.policy_cap")


def config_from_dict(d) -> RunConfig:
    d = _strict(d, TOP_KEYS, "")
    if "scenario" not in d:
        raise ConfigError("required", "scenario")
    if d["scenario"] not in SCENARIOS:
        raise ConfigError(f"unknown scenario {d['scenario']!r} (known: {', '.join(SCENARIOS)})", "scenario")
    if "seed" not in d:
        raise ConfigError("required", "seed")
    seed = _unsigned(d["seed"], "seed")
    max_steps = _unsigned(d.get("max_steps", DEFAULT_MAX_STEPS), "max_steps")
    agent = _agent(d.get("agent", {}))
    params = d.get("params", {})
    if not isinstance(params, dict):
        raise ConfigError("must be an object", "params")
    out = d.get("out")
    if out is not None and (not isinstance(out, str) or not out):
        raise ConfigError("must be a non-empty path string", "out")
    export = _strict(d.get("export", {}), EXPORT_KEYS, "export")
    metrics = export.get("metrics", [])
    if not isinstance(metrics, list) or not all(isinstance(m, str) for m in metrics):
        raise ConfigError("must be a list of metric names", "export.metrics")
    from .export import parse_metric  # late import: export depends on trace only

    for m in metrics:
        try:
            parse_metric(m)
        except ValueError as exc:
            raise ConfigError(str(exc), "export.metrics") from None
    sweep = None
    if "sweep" in d:
        s = _strict(d["sweep"], SWEEP_KEYS, "sweep")
        if "seeds" not in s:
            raise ConfigError("required", "sweep.seeds")
        workers = s.get("workers", 1)
        if not _is_int(workers) or workers < 1:
            raise ConfigError(f"must be an integer >= 1, got {workers!r}", "sweep.workers")
        sweep = SweepSpec(parse_seeds(s["seeds"]), workers)
    cfg = RunConfig(d["scenario"], seed, max_steps, agent, dict(params), out, tuple(metrics), sweep)
    _check_against_scenario(cfg)
    return cfg


def _reject_constant(name):
    raise ValueError(f"{name} is not allowed")


def parse_config_text(text: str) -> RunConfig:
    try:
        d = json.loads(text, parse_constant=_reject_constant)
    except json.JSONDecodeError as exc:
        raise ConfigError(exc.msg, line=exc.lineno, column=exc.colno) from None
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    return config_from_dict(d)


def load_config(path) -> RunConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc.strerror}") from None
    return parse_config_text(text)
