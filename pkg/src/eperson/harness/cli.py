"""Command line entry point: ``eperson [global flags] {run,sweep,export,validate}``."""

from __future__ import annotations

import argparse
import json
import sys

from ..scenarios import SCENARIOS
from ..trace import SchemaError
from .config import ConfigError, RunConfig, config_from_dict, load_config, parse_seeds
from .export import ExportError, METRICS, export_plot_data
from .run import run_one, sweep
from .validate import check_trace

EXIT_OK, EXIT_FAILED, EXIT_USAGE = 0, 1, 2


def _globals(p: argparse.ArgumentParser, suppress: bool) -> None:
    d = argparse.SUPPRESS if suppress else None
    p.add_argument("--config", default=d, help="JSON run configuration")
    p.add_argument("--seed", type=int, default=d, help="override the configured seed")
    p.add_argument("--out", default=d, help="output directory (default: $EPERSON_OUT_DIR, then ./runs)")
    p.add_argument("--quiet", action="store_true", default=argparse.SUPPRESS if suppress else False,
                   help="print nothing on success")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="eperson", description="Run active inference agent scenarios.")
    _globals(p, suppress=False)
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, help_):
        sp = sub.add_parser(name, help=help_)
        _globals(sp, suppress=True)
        return sp

    for name, help_ in (("run", "run one episode"), ("sweep", "run one episode per seed")):
        sp = add(name, help_)
        sp.add_argument("--scenario", choices=SCENARIOS, help="scenario when no --config is given")
        sp.add_argument("--max-steps", type=int, help="override max_steps")
        sp.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                        help="scenario parameter override; VALUE is parsed as JSON when possible")
        if name == "sweep":
            sp.add_argument("--seeds", help="seed list 'a,b,c' or inclusive range 'a-b'")
            sp.add_argument("--workers", type=int, help="parallel worker processes")

    sp = add("export", "write one metric from trace files as CSV")
    sp.add_argument("--metric", required=True, help="one of: " + ", ".join(METRICS))
    sp.add_argument("--output", help="CSV file (default: standard output)")
    sp.add_argument("traces", nargs="+")

    sp = add("validate", "check a configuration and/or trace files")
    sp.add_argument("traces", nargs="*")
    return p


def _value(text: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def _config(args) -> RunConfig:
    overrides = {}
    for item in getattr(args, "set", []):
        key, sep, val = item.partition("=")
        if not sep or not key:
            raise ConfigError(f"expected KEY=VALUE, got {item!r}", "--set")
        overrides[key] = _value(val)
    if args.config:
        cfg = load_config(args.config)
        d = cfg.to_dict()
        if getattr(args, "scenario", None) and args.scenario != cfg.scenario:
            raise ConfigError("conflicts with the configuration file", "--scenario")
    else:
        if not getattr(args, "scenario", None):
            raise ConfigError("give --config or --scenario", "scenario")
        d = {"scenario": args.scenario, "seed": 0 if args.seed is None else args.seed}
    if args.seed is not None:
        d["seed"] = args.seed
    if getattr(args, "max_steps", None) is not None:
        d["max_steps"] = args.max_steps
    if overrides:
        d.setdefault("params", {}).update(overrides)
    return config_from_dict(d)


def _say(args, *msg) -> None:
    if not args.quiet:
        print(*msg)


def _cmd_run(args) -> int:
    cfg = _config(args)
    res = run_one(cfg, cfg.out_dir(args.out))
    if not res.ok:
        print(f"run {res.run_id} failed: {res.error} (partial trace in {res.trace_path})", file=sys.stderr)
        return EXIT_FAILED
    _say(args, f"{res.run_id}: {res.records} records, {res.steps} steps, {res.outcome} -> {res.trace_path}")
    return EXIT_OK


def _cmd_sweep(args) -> int:
    cfg = _config(args)
    seeds = None
    if args.seeds:
        seeds = parse_seeds(args.seeds if "-" in args.seeds else [int(s) for s in args.seeds.split(",")],
                            "--seeds")
    results, summary = sweep(cfg, cfg.out_dir(args.out), seeds, args.workers)
    failed = [r for r in results if not r.ok]
    for r in failed:
        print(f"run {r.run_id} failed: {r.error}", file=sys.stderr)
    _say(args, f"{len(results)} runs, {len(failed)} failed; summary -> {summary}")
    return EXIT_FAILED if failed else EXIT_OK


def _cmd_export(args) -> int:
    text = export_plot_data(args.traces, args.metric)
    if args.output:
        with open(args.output, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def _cmd_validate(args) -> int:
    status = EXIT_OK
    if args.config:
        load_config(args.config)
        _say(args, f"config {args.config}: ok")
    elif not args.traces:
        raise ConfigError("give --config and/or trace files", "validate")
    for path in args.traces:
        problems = check_trace(path)
        if problems:
            status = EXIT_FAILED
            for msg in problems:
                print(f"{path}: {msg}", file=sys.stderr)
        else:
            _say(args, f"{path}: ok")
    return status


COMMANDS = {"run": _cmd_run, "sweep": _cmd_sweep, "export": _cmd_export, "validate": _cmd_validate}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ExportError, SchemaError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAILED
