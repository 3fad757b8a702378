"""Per-agent, per-timestep trace records and their line-delimited JSON form."""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass

SCHEMA_VERSION = "eperson-trace/1"
SIG_DIGITS = 9


class SchemaError(ValueError):
    pass


@dataclass
class PolicyRow:
    controls: list
    G: float
    epistemic: float
    pragmatic: float


@dataclass
class TraceRecord:
    run_id: str
    t: int
    agent: str
    control: int | None
    obs: int | None
    beliefs: dict
    free_energy: float | None
    policies: list
    uncertainty: dict
    valence: float | None = None
    schema: str = SCHEMA_VERSION

    @property
    def min_efe(self) -> float | None:
        if not self.policies:
            return None
        return min(p.G for p in self.policies)

    def to_dict(self) -> dict:
        d = asdict(self)
        return _round(d)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), allow_nan=False, separators=(",", ":"))

    @classmethod
    def from_dict(cls, d: dict) -> "TraceRecord":
        if d.get("schema") != SCHEMA_VERSION:
            raise SchemaError(f"unsupported trace schema {d.get('schema')!r}; expected {SCHEMA_VERSION!r}")
        d = dict(d)
        d["policies"] = [PolicyRow(**p) for p in d["policies"]]
        try:
            return cls(**d)
        except TypeError as exc:
            raise SchemaError(f"malformed trace record: {exc}") from None

    @classmethod
    def from_json(cls, line: str) -> "TraceRecord":
        return cls.from_dict(json.loads(line, parse_constant=_reject_constant))

    def rounded(self) -> "TraceRecord":
        return TraceRecord.from_dict(self.to_dict())


def _reject_constant(name):
    raise SchemaError(f"non-finite value {name} in trace record")


def round_sig(x: float) -> float:
    if not math.isfinite(x):
        raise SchemaError(f"non-finite value {x!r} in trace record")
    return float(f"{x:.{SIG_DIGITS}g}")


def _round(obj):
    if isinstance(obj, bool) or obj is None or isinstance(obj, (int, str)):
        return obj
    if isinstance(obj, float):
        return round_sig(obj)
    if isinstance(obj, dict):
        return {k: _round(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round(v) for v in obj]
    if hasattr(obj, "item"):
        return _round(obj.item())
    raise SchemaError(f"cannot serialize {type(obj).__name__}")


def write_records(records, fh) -> int:
    n = 0
    for r in records:
        fh.write(r.to_json())
        fh.write("\n")
        n += 1
    return n


def read_records(path) -> list[TraceRecord]:
    out = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                out.append(TraceRecord.from_json(line))
            except json.JSONDecodeError as exc:
                raise SchemaError(f"{path}:{lineno}: not a JSON record ({exc.msg})") from None
            except SchemaError as exc:
                raise SchemaError(f"{path}:{lineno}: {exc}") from None
    return out
