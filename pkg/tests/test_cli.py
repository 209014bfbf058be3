import json
import os
from pathlib import Path

import pytest

from diraclab.cli import EXIT_CONFIG, EXIT_NUMERIC, EXIT_OK, run
from diraclab.config import ConfigError, load_config, parse_config
from diraclab.report import config_hash, fmt_number, scan_values, to_csv, to_json

GOLDEN = Path(__file__).parent / "golden"
MODELS = ["CoulombI", "OscillatorI", "OscillatorII", "CoulombII", "OscillatorIII", "OscillatorToy",
          "CoulombToy"]
# (command, config stem, format) for each golden report
GOLDEN_RUNS = [("spectrum", m, "json") for m in MODELS] + [
    ("spectrum", "OscillatorToy", "csv"),
    ("crossings", "OscillatorI", "csv"),
    ("crossings", "CoulombII", "json"),
    ("susy", "CoulombToy", "json"),
]


def cli_output(tmp_path, *argv, epoch="0"):
    out = tmp_path / f"out-{len(list(tmp_path.iterdir()))}"
    old = os.environ.get("SOURCE_DATE_EPOCH")
    if epoch is None:
        os.environ.pop("SOURCE_DATE_EPOCH", None)
    else:
        os.environ["SOURCE_DATE_EPOCH"] = epoch
    try:
        code = run([*argv, "--out", str(out)])
    finally:
        if old is None:
            os.environ.pop("SOURCE_DATE_EPOCH", None)
        else:
            os.environ["SOURCE_DATE_EPOCH"] = old
    return code, out.read_bytes() if out.exists() else b""


def write_config(tmp_path, data, name="run.json"):
    path = tmp_path / name
    path.write_text(json.dumps(data))
    return str(path)


def drop_timestamp(data: bytes) -> bytes:
    return b"\n".join(line for line in data.split(b"\n") if b'"timestamp"' not in line)


@pytest.mark.parametrize("command,stem,fmt", GOLDEN_RUNS, ids=[f"{c}-{s}-{f}" for c, s, f in GOLDEN_RUNS])
def test_golden_report(tmp_path, command, stem, fmt):
    config = GOLDEN / f"{stem}.config.json"
    code, data = cli_output(tmp_path, command, "--config", str(config), "--format", fmt)
    assert code == EXIT_OK
    expected = GOLDEN / f"{stem}.{command}.{fmt}"
    if os.environ.get("DIRACLAB_REGEN_GOLDEN"):
        expected.write_bytes(data)
    assert data == expected.read_bytes()


@pytest.mark.parametrize("stem", MODELS)
def test_repeat_runs_identical_without_fixed_epoch(tmp_path, stem):
    config = str(GOLDEN / f"{stem}.config.json")
    _, first = cli_output(tmp_path, "spectrum", "--config", config, epoch=None)
    _, second = cli_output(tmp_path, "spectrum", "--config", config, epoch=None)
    assert drop_timestamp(first) == drop_timestamp(second)
    assert b'"timestamp"' in first


def test_spectrum_document_shape(tmp_path):
    _, data = cli_output(tmp_path, "spectrum", "--config", str(GOLDEN / "CoulombII.config.json"))
    doc = json.loads(data)
    meta = doc["metadata"]
    assert meta["kind"] == "spectrum"
    assert meta["timestamp"] == "1970-01-01T00:00:00Z"
    assert len(meta["config_hash"]) == 64
    classes = {row["classification"] for row in doc["rows"]}
    assert classes <= {"RealBound", "FlownAway", "Collapsed"}
    assert all(row["branch"] in "+-" for row in doc["rows"])


def test_verify_flag_attaches_residuals(tmp_path):
    path = write_config(tmp_path, {"model": "OscillatorI", "b": 1.0, "n_r_max": 1, "j_max": "1/2"})
    code, data = cli_output(tmp_path, "spectrum", "--config", path, "--verify")
    assert code == EXIT_OK
    rows = json.loads(data)["rows"]
    assert rows and all(r["oracle_converged"] for r in rows)
    assert all(r["oracle_rel_residual"] <= 1e-6 for r in rows)


def test_verify_failures_exit_numeric(tmp_path):
    path = write_config(tmp_path, {"model": "CoulombI", "a": 0.0, "b": 1.0, "n_r_max": 1, "j_max": "1/2"})
    code, data = cli_output(tmp_path, "verify", "--config", path)
    assert code == EXIT_NUMERIC
    doc = json.loads(data)
    assert doc["metadata"]["oracle_failures"] > 0


def test_verify_reingests_report(tmp_path):
    path = write_config(tmp_path, {"model": "OscillatorIII", "beta1": -1.0, "beta2": 1.0, "n_r_max": 1,
                                   "ell_max": 1, "j_max": "3/2"})
    _, report = cli_output(tmp_path, "spectrum", "--config", path)
    saved = tmp_path / "report.json"
    saved.write_bytes(report)
    code, data = cli_output(tmp_path, "verify", "--report", str(saved))
    assert code == EXIT_OK
    doc = json.loads(data)
    assert doc["metadata"]["config_hash"] == json.loads(report)["metadata"]["config_hash"]


def test_crossings_not_feasible_csv(tmp_path):
    code, data = cli_output(tmp_path, "crossings", "--config", str(GOLDEN / "OscillatorIII.config.json"),
                            "--format", "csv")
    assert code == EXIT_OK
    assert data.startswith(b"feasible,statement\r\nfalse,")


def test_susy_needs_toy(tmp_path):
    code, _ = cli_output(tmp_path, "susy", "--config", str(GOLDEN / "CoulombI.config.json"))
    assert code == EXIT_CONFIG


def test_scan_marks_flown_away_transitions(tmp_path):
    path = write_config(tmp_path, {"model": "CoulombI", "a": 0.0, "b": 0.0, "n_r_max": 2, "j_max": "1/2",
                                   "scan_parameter": "b", "scan_start": 0.5, "scan_stop": 3.5,
                                   "scan_steps": 7, "scan_factor": "-1j"})
    code, data = cli_output(tmp_path, "scan", "--config", path)
    assert code == EXIT_OK
    rows = json.loads(data)["rows"]
    flown = {(r["scan_value"], r["n_r"], r["kappa"]) for r in rows if r["classification"] == "FlownAway"}
    # exactly the states whose n~ = n_r + kappa + 1 equals b0
    assert flown == {(1.0, 1, -1), (2.0, 0, 1), (2.0, 2, -1), (3.0, 1, 1)}
    assert any(r["transition"] for r in rows)


def test_scan_oscillator3_never_collapses(tmp_path):
    path = write_config(tmp_path, {"model": "OscillatorIII", "beta1": 0.0, "beta2": 1.0, "n_r_max": 1,
                                   "ell_max": 1, "j_max": "3/2", "scan_parameter": "beta1",
                                   "scan_start": 0.0, "scan_stop": -5.0, "scan_steps": 11})
    _, data = cli_output(tmp_path, "scan", "--config", path)
    assert all(r["classification"] == "RealBound" for r in json.loads(data)["rows"])


@pytest.mark.parametrize("data,message", [
    ({"model": "CoulombI", "a": 0, "b": 1, "colour": 3}, "unknown config keys"),
    ({"model": "CoulombI", "a": 0}, "requires couplings"),
    ({"model": "CoulombI", "a": 0, "b": 1, "B": 1}, "does not take"),
    ({"model": "Higgs"}, "unknown model"),
    ({"a": 0}, "missing required key"),
    ({"model": "OscillatorI", "b": -1}, "must be > 0"),
    ({"model": "OscillatorI", "b": 1, "j_max": 2}, "half-integer"),
    ({"model": "OscillatorI", "b": 1, "n_r_max": -1}, "integer"),
    ({"model": "OscillatorI", "b": 1, "format": "xml"}, "format"),
    ({"model": "OscillatorI", "b": 1, "scan_steps": 3}, "without scan_parameter"),
    ({"model": "OscillatorI", "b": 1, "scan_parameter": "B", "scan_start": 0, "scan_stop": 1,
      "scan_steps": 2}, "scan_parameter"),
    ({"model": "OscillatorI", "b": "one"}, "cannot read"),
    ({"model": "OscillatorI", "b": True}, "boolean"),
])
def test_config_rejections(data, message):
    with pytest.raises(ConfigError, match=message):
        parse_config(data)


def test_config_parsing_details():
    cfg = parse_config({"model": "CoulombII", "alpha1": "0.4j", "alpha2": -0.3, "j_max": 1.5})
    assert cfg.couplings["alpha1"] == 0.4j
    assert cfg.two_j_max == 3
    assert cfg.canonical()["alpha1"] == "0.4j"
    assert cfg.canonical()["j_max"] == "3/2"
    same = parse_config({"alpha2": -0.3, "model": "CoulombII", "j_max": "3/2", "alpha1": "0.4j"})
    assert config_hash(cfg) == config_hash(same)
    assert config_hash(cfg) != config_hash(cfg.with_overrides(tol=1e-8))


def test_zero_length_scan_rejected(tmp_path):
    cfg = parse_config({"model": "OscillatorI", "b": 1, "scan_parameter": "b", "scan_start": 1,
                        "scan_stop": 1, "scan_steps": 3})
    with pytest.raises(ValueError):
        scan_values(cfg)
    path = write_config(tmp_path, cfg.canonical() | {"model": "OscillatorI"})
    code, _ = cli_output(tmp_path, "scan", "--config", path)
    assert code == EXIT_CONFIG


def test_malformed_and_missing_config(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{nope")
    with pytest.raises(ConfigError, match="malformed"):
        load_config(bad)
    assert cli_output(tmp_path, "spectrum", "--config", str(bad))[0] == EXIT_CONFIG
    assert cli_output(tmp_path, "spectrum", "--config", str(tmp_path / "absent.json"))[0] == EXIT_CONFIG
    assert run(["spectrum"]) == EXIT_CONFIG
    assert run(["frobnicate"]) == EXIT_CONFIG


def test_serialisation_primitives():
    assert fmt_number(0.1) == "0.10000000000000001"
    assert fmt_number(3) == "3"
    assert fmt_number(float("nan")) is None
    assert to_json({"x": [1.5, None, True, "a"], "y": {}}) == (
        '{\n  "x": [\n    1.5,\n    null,\n    true,\n    "a"\n  ],\n  "y": {}\n}\n')
    assert to_csv([{"a": 1.0, "b": None}]) == "a,b\r\n1,\r\n"
