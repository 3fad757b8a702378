"""Checks for written runs: trace schema, manifest agreement, cell ranges."""

from __future__ import annotations

import hashlib
import json

from ..trace import SchemaError, read_records
from ..uncertainty import NA
from .run import COMPLETE, MANIFEST_VERSION


def manifest_path_for(trace_path: str) -> str:
    base = trace_path[:-len(".jsonl")] if trace_path.endswith(".jsonl") else trace_path
    return base + ".manifest.json"


def check_trace(path: str) -> list[str]:
    """Problems found in one trace file and its manifest (empty if none)."""
    problems = []
    try:
        records = read_records(path)
    except (OSError, SchemaError) as exc:
        return [str(exc)]
    for r in records:
        for key, v in r.uncertainty.items():
            if v != NA and (not isinstance(v, (int, float)) or v < 0):
                problems.append(f"t={r.t} agent={r.agent}: uncertainty {key} = {v!r}")
    mpath = manifest_path_for(path)
    try:
        with open(mpath, encoding="utf-8") as fh:
            manifest = json.load(fh)
        with open(path, "rb") as fh:
            digest = hashlib.sha256(fh.read()).hexdigest()
    except (OSError, json.JSONDecodeError) as exc:
        return problems + [f"manifest {mpath}: {exc}"]
    if manifest.get("manifest") != MANIFEST_VERSION:
        problems.append(f"manifest version {manifest.get('manifest')!r}")
    if manifest.get("status") != COMPLETE:
        problems.append(f"run marked {manifest.get('status')!r}")
    if manifest.get("trace_sha256") != digest:
        problems.append("trace does not match the manifest checksum")
    if manifest.get("totals", {}).get("records") != len(records):
        problems.append("record count differs from the manifest")
    return problems
