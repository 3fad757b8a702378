import csv
import json
import os

import pytest

from eperson.harness import cli
from eperson.harness import run as run_mod
from eperson.harness.config import ConfigError, config_from_dict, load_config, parse_config_text
from eperson.harness.export import ExportError, export_plot_data
from eperson.harness.run import run_one, sweep
from eperson.harness.validate import check_trace
from eperson.scenarios import make_scenario


def test_minimal_config_defaults():
    cfg = parse_config_text('{"scenario": "tmaze", "seed": 7}')
    assert cfg.max_steps == 20 and cfg.params == {} and cfg.metrics == () and cfg.sweep is None
    assert cfg.agent.w is None and cfg.out is None


def test_unknown_key_named():
    with pytest.raises(ConfigError, match="presicion"):
        config_from_dict({"scenario": "tmaze", "seed": 1, "agent": {"presicion": 2}})
    with pytest.raises(ConfigError, match="params.presicion"):
        config_from_dict({"scenario": "tmaze", "seed": 1, "params": {"presicion": 2}})


def test_w_range_error():
    with pytest.raises(ConfigError, match=r"\[0,1\]") as info:
        config_from_dict({"scenario": "public-goods", "seed": 1, "agent": {"w": 1.5}})
    assert info.value.key == "agent.w"


def test_parse_error_position(tmp_path):
    p = tmp_path / "c.json"
    p.write_text('{\n  "scenario": "tmaze",\n  "seed": 7,\n}\n')
    with pytest.raises(ConfigError) as info:
        load_config(p)
    assert (info.value.line, info.value.column) == (4, 1)
    assert "line 4, column 1" in str(info.value)


def test_policy_cap_and_metric_checked_at_load():
    with pytest.raises(ConfigError, match="policy_cap"):
        config_from_dict({"scenario": "tmaze", "seed": 0, "agent": {"policy_cap": 4}})
    with pytest.raises(ConfigError, match="export.metrics"):
        config_from_dict({"scenario": "tmaze", "seed": 0, "export": {"metrics": ["u.level4.first"]}})


def test_run_writes_trace_and_manifest(tmp_path):
    cfg = config_from_dict({"scenario": "tmaze", "seed": 7, "max_steps": 20})
    res = run_one(cfg, str(tmp_path))
    assert res.ok
    lines = open(res.trace_path).read().splitlines()
    assert len(lines) == res.records == 1 * (res.steps + 1)
    manifest = json.load(open(res.manifest_path))
    assert manifest["status"] == "complete" and manifest["config"]["seed"] == 7
    assert manifest["totals"]["records"] == len(lines)
    assert check_trace(res.trace_path) == []
    first = open(res.trace_path, "rb").read()
    run_one(cfg, str(tmp_path))
    assert open(res.trace_path, "rb").read() == first


def test_signaling_counts(tmp_path):
    cfg = config_from_dict({"scenario": "signaling", "seed": 3, "max_steps": 20})
    res = run_one(cfg, str(tmp_path))
    assert res.records == 2 * (20 + 1) and res.outcome == "step_limit"


def test_validate_detects_tampering(tmp_path):
    res = run_one(config_from_dict({"scenario": "signaling", "seed": 0, "max_steps": 2}), str(tmp_path))
    with open(res.trace_path, "a") as fh:
        fh.write(open(res.trace_path).readline())
    problems = check_trace(res.trace_path)
    assert any("checksum" in p for p in problems) and any("record count" in p for p in problems)


def test_sweep_hundred_seeds(tmp_path):
    cfg = config_from_dict({"scenario": "signaling", "seed": 0, "max_steps": 2, "sweep": {"seeds": "0-99"}})
    results, summary = sweep(cfg, str(tmp_path))
    assert len(results) == 100 and all(r.ok for r in results)
    assert len([f for f in os.listdir(tmp_path) if f.endswith(".jsonl")]) == 100
    rows = list(csv.DictReader(open(summary)))
    assert len(rows) == 100 and rows[0]["seed"] == "0" and rows[-1]["status"] == "complete"


def test_export(tmp_path):
    res = run_one(config_from_dict({"scenario": "tmaze", "seed": 7, "max_steps": 3}), str(tmp_path))
    text = export_plot_data([res.trace_path], "u.level2.first").splitlines()
    assert text[0] == "run_id,step,agent,u.level2.first (nats)"
    assert len(text) == 1 + res.records
    assert all(float(line.split(",")[3]) >= 0 for line in text[1:])
    g = export_plot_data([res.trace_path], "G.min").splitlines()
    assert g[1].endswith(",NA") and g[0].endswith("(nats)")
    assert all(line.split(",")[3] != "NA" for line in g[2:])
    empty = tmp_path / "empty.jsonl"
    empty.write_text("")
    assert export_plot_data([str(empty)], "F") == "run_id,step,agent,F (nats)\n"
    with pytest.raises(ExportError):
        export_plot_data([str(empty)], "joy")


def test_failed_run_keeps_partial_trace(tmp_path, monkeypatch):
    def broken(name, seed=None, **kw):
        sc = make_scenario(name, seed, **kw)
        step, calls = sc.env.step, []

        def failing(controls):
            calls.append(1)
            if len(calls) == 3:
                raise RuntimeError("actuator fault")
            return step(controls)

        sc.env.step = failing
        return sc

    monkeypatch.setattr(run_mod, "make_scenario", broken)
    res = run_one(config_from_dict({"scenario": "signaling", "seed": 1, "max_steps": 10}), str(tmp_path))
    assert not res.ok and res.records == 2 * 3
    manifest = json.load(open(res.manifest_path))
    assert manifest["status"] == "failed"
    assert manifest["error"]["message"] == "actuator fault"
    assert manifest["error"]["last_record"]["t"] == 2
    assert any("failed" in p for p in check_trace(res.trace_path))


def test_cli_flags(tmp_path, capsys, monkeypatch):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"scenario": "signaling", "seed": 1, "max_steps": 2}))
    out = tmp_path / "o"
    assert cli.main(["--config", str(cfg), "--seed", "4", "--out", str(out), "run"]) == 0
    assert (out / "signaling-seed4.jsonl").exists()
    assert cli.main(["run", "--config", str(cfg), "--out", str(out), "--quiet"]) == 0
    assert capsys.readouterr().out.count("\n") == 1
    trace = str(out / "signaling-seed1.jsonl")
    assert cli.main(["validate", "--quiet", trace]) == 0
    assert cli.main(["--config", str(cfg), "validate"]) == 0
    assert cli.main(["export", "--metric", "control", "--output", str(tmp_path / "c.csv"), trace]) == 0
    assert (tmp_path / "c.csv").read_text().startswith("run_id,step,agent,control (index)")
    assert cli.main(["sweep", "--scenario", "signaling", "--seeds", "0,2", "--max-steps", "1",
                     "--out", str(out), "--quiet"]) == 0
    assert (out / "signaling-summary.csv").exists()
    assert cli.main(["run", "--scenario", "tmaze", "--set", "presicion=2", "--out", str(out)]) == 2
    assert "presicion" in capsys.readouterr().err

    monkeypatch.setenv("EPERSON_OUT_DIR", str(tmp_path / "env"))
    assert cli.main(["run", "--scenario", "signaling", "--max-steps", "1", "--quiet"]) == 0
    assert (tmp_path / "env" / "signaling-seed0.jsonl").exists()
