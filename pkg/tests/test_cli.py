import csv
import json
import os
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from daceq.cli import EXIT_CODES
from daceq.pulses import pulse_amplitude

GOLDEN = Path(__file__).parent / "golden"


def run(*args, cwd=None, env=None):
    e = dict(os.environ)
    e.update(env or {})
    return subprocess.run([sys.executable, "-m", "daceq", *map(str, args)], capture_output=True, text=True, cwd=cwd, env=e)


def report(out: str) -> dict:
    return dict(line.split(": ", 1) for line in out.strip().splitlines())


def assert_error(cp, reason):
    assert cp.returncode == EXIT_CODES[reason], cp.stderr
    lines = cp.stderr.strip().splitlines()
    assert len(lines) == 1 and lines[0].startswith(f"error: {reason}: ")


def test_exit_codes_distinct():
    assert len(set(EXIT_CODES.values())) == len(EXIT_CODES)
    assert 0 not in EXIT_CODES.values()


def test_help():
    cp = run("--help")
    assert cp.returncode == 0
    for cmd in ("design", "search", "estimate", "sweep", "fit", "verify", "plot-data"):
        assert cmd in cp.stdout


def test_design_and_verify(tmp_path):
    out = tmp_path / "f.json"
    cp = run("design", "--pulse", "rtz", "--nb", 2, "--type", "I", "--order", 12, "--bandwidth", 0.8, "--out", out)
    assert cp.returncode == 0, cp.stderr
    r = report(cp.stdout)
    assert float(r["delta_N"]) <= 1e-3
    assert float(r["delay_K"]) == 6.25 and int(r["multipliers"]) == 7
    assert len(r["extremal_wT_over_pi"].split()) >= 8
    cp = run("verify", "--filter", out)
    assert cp.returncode == 0, cp.stderr
    v = report(cp.stdout)
    assert float(v["delta_recorded"]) <= float(v["delta_verified"]) <= 1.02 * float(v["delta_recorded"])


def test_design_order_zero(tmp_path):
    out = tmp_path / "f.json"
    cp = run("design", "--pulse", "nrtz", "--nb", 1, "--type", "I", "--order", 0, "--bandwidth", 0.04, "--out", out)
    assert cp.returncode == 0, cp.stderr
    amin = pulse_amplitude("nrtz", 0.04 * np.pi)
    data = json.loads(out.read_text())
    assert data["coefficients"][0] == pytest.approx(2 / (1 + amin), abs=1e-9)
    assert float(report(cp.stdout)["delta_N"]) == pytest.approx((1 - amin) / (1 + amin), abs=1e-9)


def test_design_default_output_name(tmp_path):
    cp = run("design", "--pulse", "rtc", "--nb", 2, "--type", "III", "--order", 10, "--bandwidth", 0.5, cwd=tmp_path)
    assert cp.returncode == 0, cp.stderr
    assert (tmp_path / "rtc_nb2_III_N10.json").exists()


def test_invalid_combination():
    cp = run("design", "--pulse", "rtc", "--nb", 1, "--type", "III", "--order", 12, "--bandwidth", 0.8)
    assert_error(cp, "invalid-problem")
    assert "band 1" in cp.stderr


@pytest.mark.parametrize(
    "args",
    [
        ("design", "--pulse", "rtz", "--nb", 2, "--type", "I", "--order", 13, "--bandwidth", 0.8),
        ("design", "--pulse", "rtz", "--nb", 2, "--type", "I", "--order", 12, "--bandwidth", 1.0),
        ("search", "--pulse", "rtz", "--nb", 2, "--type", "I", "--bandwidth", 0.8, "--delta", 2),
        ("design", "--pulse", "dsd", "--nb", 2, "--type", "I", "--order", 12, "--bandwidth", 0.8),
    ],
)
def test_invalid_problem(args):
    assert_error(run(*args), "invalid-problem")


def test_usage_error():
    cp = run("design", "--pulse", "rtz")
    assert cp.returncode == EXIT_CODES["usage"]


@pytest.mark.parametrize(
    "pulse, t, n",
    [("rtz", "I", 12), ("rtz", "II", 37)],
)
def test_search(pulse, t, n):
    cp = run("search", "--pulse", pulse, "--nb", 2, "--type", t, "--bandwidth", 0.8, "--delta", 1e-3)
    assert cp.returncode == 0, cp.stderr
    assert int(report(cp.stdout)["n_min"]) == n


def test_search_order_zero():
    cp = run("search", "--pulse", "nrtz", "--nb", 1, "--type", "I", "--bandwidth", 0.04, "--delta", 0.1)
    assert int(report(cp.stdout)["n_min"]) == 0


def test_search_cap():
    cp = run("search", "--pulse", "rtz", "--nb", 2, "--type", "II", "--bandwidth", 0.96, "--delta", 1e-5, "--cap", 41)
    assert_error(cp, "order-cap")


def test_estimate():
    cp = run("estimate", "--pulse", "rtz", "--nb", 2, "--type", "I", "--bandwidth", 0.8, "--delta", 1e-3)
    r = report(cp.stdout)
    assert abs(float(r["n_est_raw"]) - 12) <= 3.06
    assert int(r["n_est"]) == 12 and float(r["eps_max"]) == 3.06


def test_estimate_errors():
    cp = run("estimate", "--pulse", "rtcz", "--nb", 2, "--type", "I", "--bandwidth", 0.8, "--delta", 1e-3)
    assert_error(cp, "unknown-row")
    cp = run("estimate", "--pulse", "rtz", "--nb", 1, "--type", "I", "--bandwidth", 0.8, "--delta", 1.5)
    assert_error(cp, "invalid-problem")
    cp = run("estimate", "--pulse", "rtz", "--nb", 1, "--type", "I", "--bandwidth", 0.8, "--delta", 1e-3,
             "--params", "/nonexistent/p.json")
    assert_error(cp, "io")


def test_config_precedence(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"pulse": "rtz", "nb": 2, "type": "I", "bandwidth": 0.8, "delta": 0.001}))
    cp = run("search", "--config", cfg)
    assert int(report(cp.stdout)["n_min"]) == 12
    cp = run("search", "--config", cfg, "--type", "II")
    assert int(report(cp.stdout)["n_min"]) == 37


@pytest.mark.parametrize(
    "content", ['{"pulse": "rtz", "bogus": 1}', "[1, 2]", "{oops", '{"nb": "two"}', '{"engine": "firpm"}']
)
def test_bad_config(tmp_path, content):
    cfg = tmp_path / "c.json"
    cfg.write_text(content)
    assert_error(run("search", "--config", cfg), "config")


def test_missing_config(tmp_path):
    assert_error(run("search", "--config", tmp_path / "none.json"), "config")


def test_verify_bad_file(tmp_path):
    f = tmp_path / "f.json"
    f.write_text('{"schema_version": 1}')
    assert_error(run("verify", "--filter", f), "io")
    assert_error(run("verify", "--filter", tmp_path / "missing.json"), "io")


def test_sweep_resume_and_fit(tmp_path):
    env = {"DACEQ_CACHE_DIR": str(tmp_path / "cache")}
    args = ("sweep", "--pulse", "nrtz", "--nb", 1, "--type", "I", "--nB", 5, "--nD", 4, "--workers", 2)
    first = run(*args, env=env)
    assert first.returncode == 0, first.stderr
    r1 = report(first.stdout)
    assert int(r1["design_calls"]) > 0 and int(r1["cells"]) == 20
    path = Path(r1["sweep_file"])
    assert path.parent == tmp_path / "cache"
    second = report(run(*args, env=env).stdout)
    assert int(second["design_calls"]) == 0
    out = tmp_path / "p.json"
    cp = run("fit", "--sweep", path, "--out", out, "--seed", 7, "--restarts", 2, "--max-iter", 400)
    assert cp.returncode == 0, cp.stderr
    r = report(cp.stdout)
    assert float(r["eps"]) <= float(r["init_eps"])
    data = json.loads(out.read_text())
    assert data["eps_max"] == pytest.approx(float(r["eps"]))
    assert data["provenance"]["seed"] == 7
    cp = run("estimate", "--pulse", "nrtz", "--nb", 1, "--type", "I", "--bandwidth", 0.5, "--delta", 1e-3, "--params", out)
    assert cp.returncode == 0, cp.stderr


def test_fit_missing_sweep(tmp_path):
    assert_error(run("fit", "--sweep", tmp_path / "none.csv", "--pulse", "rtz", "--nb", 1, "--type", "I"), "io")


def test_plot_data(tmp_path):
    cp = run("plot-data", "--outdir", tmp_path, "--bandwidths", 0.4, 0.8)
    assert cp.returncode == 0, cp.stderr
    assert (tmp_path / "pulses.csv").read_text() == (GOLDEN / "pulses.csv").read_text()
    with open(tmp_path / "magnitude.csv") as fh:
        rows = list(csv.DictReader(fh))
    w = np.array([float(r["wT_over_pi"]) for r in rows])

    def at(x):
        return rows[int(np.argmin(np.abs(w - x)))]

    assert float(at(2.0)["NRTZ"]) < 1e-15
    assert float(at(1.0)["NRTZ"]) == pytest.approx(2 / np.pi)
    assert float(at(4.0)["RTC"]) < 1e-15
    with open(tmp_path / "orders.csv") as fh:
        orders = list(csv.DictReader(fh))
    assert len(orders) == 22 * 2
    row = next(r for r in orders if r["pulse"] == "RTZ" and r["nb"] == "2" and r["filter_type"] == "I"
               and float(r["B_over_pi"]) == 0.8)
    assert int(row["n_min"]) == 12
