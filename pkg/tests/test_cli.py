import csv
import io
import json
import subprocess
import sys
from math import pi

import pytest

from clifford_szego import cli
from clifford_szego.harness import CONFIG_ENV, ConfigError, RunConfig, load_config


def run(argv, capsys):
    code = cli.main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_kernel_command(capsys, tmp_path):
    code, out, _ = run(["kernel", "--m", "2", "--degree", "4", "--cache-dir", str(tmp_path)], capsys)
    assert code == 0
    data = json.loads(out)
    assert data["status"] == "pass"
    assert data["quad_order"] == 10
    assert data["selftest_relative_residual"] < 1e-8
    assert (tmp_path / f"szego-{data['key']}.json").exists()


def test_tampered_cache_exits_2(capsys, tmp_path):
    assert run(["kernel", "--m", "1", "--degree", "3", "--cache-dir", str(tmp_path)], capsys)[0] == 0
    f = next(tmp_path.iterdir())
    data = json.loads(f.read_text())
    data["scale"] = 2.0
    f.write_text(json.dumps(data))
    code, _, err = run(["kernel", "--m", "1", "--degree", "3", "--cache-dir", str(tmp_path)], capsys)
    assert code == 2
    assert "cache key" in err


def test_low_quadrature_order_rejected(capsys):
    code, _, err = run(["kernel", "--degree", "6", "--quad-order", "10"], capsys)
    assert code == 2
    assert "config error" in err


def test_usage_error_exit_code(capsys):
    with pytest.raises(SystemExit) as exc:
        cli.main(["verify", "nonsense"])
    assert exc.value.code == 2


def test_metric_command(capsys):
    code, out, _ = run(["metric", "--m", "1", "--degree", "12", "--points", "0,0;0.3,0.1"], capsys)
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    assert float(rows[0]["lambda"]) == pytest.approx(1 / (2 * pi), rel=1e-12)
    assert float(rows[1]["curvature"]) < 0


def test_metric_rejects_outside_points(capsys):
    code, _, err = run(["metric", "--m", "1", "--degree", "4", "--points", "0.9,0.9"], capsys)
    assert code == 2
    code, _, _ = run(["metric", "--m", "1", "--degree", "4", "--points", "0.1,0.1,0.1"], capsys)
    assert code == 2


def test_distance_command(capsys, tmp_path):
    path = tmp_path / "path.csv"
    code, out, _ = run(["distance", "--m", "1", "--degree", "12", "--z1", "0,0", "--z2", "0.4,0.2",
                        "--step", "0.1", "--path-out", str(path)], capsys)
    assert code == 0
    data = json.loads(out)
    assert 0 < data["distance"] <= data["straight_length"] + 1e-15
    rows = list(csv.DictReader(open(path)))
    assert rows[0] == {"z0": "0", "z1": "0"}


def test_caratheodory_command(capsys):
    code, out, _ = run(["caratheodory", "--m", "2", "--degree", "4", "--points", "0,0,0",
                        "--k2-directions", "2"], capsys)
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    assert float(rows[0]["dC_lower"]) > 0
    code, out, _ = run(["caratheodory", "--m", "2", "--degree", "2", "--blowup", "1,0,0"], capsys)
    vals = [float(r["dC_lower"]) for r in csv.DictReader(io.StringIO(out))]
    assert vals == sorted(vals, reverse=True)


def test_config_file_and_env(tmp_path, monkeypatch, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"m": [1], "degree": 3, "seed": 7}))
    assert load_config(str(cfg)).degree == 3
    assert load_config(str(cfg), degree=5).degree == 5
    monkeypatch.setenv(CONFIG_ENV, str(cfg))
    code, out, _ = run(["kernel"], capsys)
    assert code == 0
    assert json.loads(out)["N"] == 3
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"degre": 3}))
    code, _, err = run(["kernel", "--config", str(bad)], capsys)
    assert code == 2 and "unknown config keys" in err
    bad.write_text("{not json")
    assert run(["kernel", "--config", str(bad)], capsys)[0] == 2


def test_config_validation():
    RunConfig().validate(kernel_command=True)
    with pytest.raises(ConfigError):
        RunConfig(domain="cube").validate(kernel_command=True)
    with pytest.raises(ConfigError):
        RunConfig(helper_center=[0.0, 0.5, 0.0]).validate(kernel_command=True)
    with pytest.raises(ConfigError):
        RunConfig(fd_step=-1.0).validate(kernel_command=True)
    assert RunConfig(degree=5).order == 12


def test_verify_algebra_is_deterministic(tmp_path, capsys):
    outs = []
    p = tmp_path / "r.json"
    for _ in range(2):
        assert run(["verify", "algebra", "--m", "1", "2", "--no-timing", "--out", str(p)], capsys)[0] == 0
        outs.append(p.read_bytes())
    assert outs[0] == outs[1]
    report = json.loads(outs[0])
    names = {c["name"] for c in report["checks"]}
    assert "algebra.anticommutation.m2" in names
    assert all(c["runtime"] is None for c in report["checks"])


def test_verify_markdown(tmp_path, capsys):
    md = tmp_path / "trace.md"
    code, _, _ = run(["verify", "distance", "--m", "1", "--markdown", str(md), "--out", str(tmp_path / "r.json")],
                     capsys)
    assert code == 0
    text = md.read_text()
    assert text.startswith("|") and "distance.triangle.m1" in text


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "clifford_szego", "--help"], capture_output=True, text=True)
    assert proc.returncode == 0
    assert "verify" in proc.stdout
