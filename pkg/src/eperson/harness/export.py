"""Project trace files onto one metric as comma-separated columns."""

from __future__ import annotations

import re

from ..trace import TraceRecord, read_records
from ..uncertainty import NA

_UNCERTAINTY = re.compile(r"^u\.level([123])\.(first|second|third)$")
UNITS = {"G.min": "nats", "F": "nats", "valence": "nats", "control": "index", "obs": "index"}
METRICS = ("u.level{1,2,3}.{first,second,third}",) + tuple(UNITS)


class ExportError(ValueError):
    pass


def parse_metric(name: str):
    """Return ``(unit, getter)`` for a metric selector."""
    m = _UNCERTAINTY.match(name)
    if m:
        key = f"level{m.group(1)}.{m.group(2)}"
        return "nats", lambda r: r.uncertainty.get(key, NA)
    getters = {
        "G.min": lambda r: r.min_efe,
        "F": lambda r: r.free_energy,
        "valence": lambda r: r.valence,
        "control": lambda r: r.control,
        "obs": lambda r: r.obs,
    }
    if name not in getters:
        raise ExportError(f"unknown metric {name!r}; known: {', '.join(METRICS)}")
    return UNITS[name], getters[name]


def _cell(v) -> str:
    if v is None or v == NA:
        return NA
    if isinstance(v, float):
        return format(v, ".9g")
    return str(v)


def rows(records: list[TraceRecord], metric: str) -> list[tuple]:
    _, get = parse_metric(metric)
    return [(r.run_id, r.t, r.agent, get(r)) for r in records]


def export_plot_data(paths, metric: str) -> str:
    """One row per record: run id, step, agent and the metric value.

    Missing values (no plan at t = 0, a cell absent for the topology) are
    written as ``NA``. An empty trace yields the header alone.
    """
    unit, _ = parse_metric(metric)
    lines = [f"run_id,step,agent,{metric} ({unit})"]
    for path in paths:
        for run_id, t, agent, v in rows(read_records(path), metric):
            lines.append(f"{run_id},{t},{agent},{_cell(v)}")
    return "\n".join(lines) + "\n"
