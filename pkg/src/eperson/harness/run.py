"""Run orchestration and persistence.

Each run writes ``<run_id>.jsonl`` (one trace record per line) and
``<run_id>.manifest.json``. Both are written to a temporary name and moved
into place, so a reader sees either nothing or a finished file. A failing
run still writes the records produced so far, with the manifest marked
``failed`` and the error and last record context recorded.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import os
import tempfile
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from ..scenarios import make_scenario
from ..scenarios.runner import EpisodeStream
from ..trace import SCHEMA_VERSION, write_records
from .config import RunConfig
from .export import export_plot_data

MANIFEST_VERSION = "eperson-manifest/1"
COMPLETE, FAILED = "complete", "failed"
SUMMARY_FIELDS = ("run_id", "seed", "status", "outcome", "steps", "records", "mean_free_energy",
                  "mean_min_efe")


@dataclass
class RunResult:
    run_id: str
    seed: int
    status: str
    outcome: str | None
    steps: int
    records: int
    trace_path: str
    manifest_path: str
    mean_free_energy: float | None = None
    mean_min_efe: float | None = None
    error: str | None = None

    @property
    def ok(self) -> bool:
        return self.status == COMPLETE


def atomic_write(path: str, data: str) -> None:
    d = os.path.dirname(os.path.abspath(path))
    os.makedirs(d, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _mean(values) -> float | None:
    vals = [v for v in values if v is not None]
    return float(np.mean(vals)) if vals else None


def run_id_for(cfg: RunConfig, seed: int) -> str:
    return f"{cfg.scenario}-seed{seed}"


def run_one(cfg: RunConfig, out_dir: str, seed: int | None = None) -> RunResult:
    seed = cfg.seed if seed is None else seed
    cfg = cfg.with_seed(seed)
    run_id = run_id_for(cfg, seed)
    trace_path = os.path.join(out_dir, run_id + ".jsonl")
    manifest_path = os.path.join(out_dir, run_id + ".manifest.json")
    records, error, stream = [], None, None
    try:
        stream = EpisodeStream(make_scenario(cfg.scenario, seed, **cfg.scenario_kwargs()), cfg.max_steps,
                               seed, run_id)
        for rec in stream:
            rec.to_json()  # serializability and finiteness are checked per record
            records.append(rec)
    except Exception as exc:  # a scenario failure is reported, not raised
        error = {"type": type(exc).__name__, "message": str(exc)}
        if records:
            last = records[-1]
            error["last_record"] = {"t": last.t, "agent": last.agent, "control": last.control, "obs": last.obs}

    buf = io.StringIO()
    write_records(records, buf)
    text = buf.getvalue()
    atomic_write(trace_path, text)
    status = FAILED if error else COMPLETE
    outcome = None if error or stream is None else stream.outcome
    steps = max((r.t for r in records), default=0)
    result = RunResult(run_id, seed, status, outcome, steps, len(records), trace_path, manifest_path,
                       _mean(r.free_energy for r in records), _mean(r.min_efe for r in records),
                       None if error is None else error["message"])
    manifest = {
        "manifest": MANIFEST_VERSION,
        "schema": SCHEMA_VERSION,
        "run_id": run_id,
        "status": status,
        "config": cfg.to_dict(),
        "trace": os.path.basename(trace_path),
        "trace_sha256": hashlib.sha256(text.encode("utf-8")).hexdigest(),
        "totals": {"records": len(records), "steps": steps, "outcome": outcome,
                   "agents": sorted({r.agent for r in records})},
        "error": error,
    }
    atomic_write(manifest_path, json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    if status == COMPLETE:
        for metric in cfg.metrics:
            safe = metric.replace(".", "_")
            atomic_write(os.path.join(out_dir, f"{run_id}.{safe}.csv"), export_plot_data([trace_path], metric))
    return result


def _run_one_args(args):
    return run_one(*args)


def sweep(cfg: RunConfig, out_dir: str, seeds=None, workers: int | None = None) -> tuple[list[RunResult], str]:
    """One run per seed, then ``<scenario>-summary.csv`` once all are done."""
    seeds = tuple(seeds if seeds is not None else (cfg.sweep.seeds if cfg.sweep else (cfg.seed,)))
    workers = workers or (cfg.sweep.workers if cfg.sweep else 1)
    jobs = [(cfg, out_dir, s) for s in seeds]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_run_one_args, jobs))
    else:
        results = [run_one(*j) for j in jobs]
    summary_path = os.path.join(out_dir, f"{cfg.scenario}-summary.csv")
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SUMMARY_FIELDS)
    for r in results:
        w.writerow(["" if getattr(r, f) is None else
                    (format(getattr(r, f), ".9g") if isinstance(getattr(r, f), float) else getattr(r, f))
                    for f in SUMMARY_FIELDS])
    atomic_write(summary_path, buf.getvalue())
    return results, summary_path
