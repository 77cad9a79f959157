import numpy as np
import pytest

from daceq.plotdata import magnitude_responses, order_curves, pulse_shapes


def test_pulse_shapes():
    s = pulse_shapes()
    t = s["t_over_T"]
    assert t[0] == -0.25 and t[-1] == 1.25
    # unit area for the unipolar pulses over their active time, zero for the bipolar ones
    dt = t[1] - t[0]
    assert np.sum(s["NRTZ"]) * dt == pytest.approx(1.0, abs=2 * dt)
    assert np.sum(s["RTZ"]) * dt == pytest.approx(0.5, abs=2 * dt)
    assert np.sum(s["RTC"]) * dt == pytest.approx(0.0, abs=2 * dt)
    assert np.sum(s["RTCZ"]) * dt == pytest.approx(0.0, abs=2 * dt)


def test_magnitudes():
    m = magnitude_responses()
    w = m["wT_over_pi"]
    assert w[0] == 0 and w[-1] == pytest.approx(6.0)
    i2 = int(np.argmin(np.abs(w - 2)))
    assert m["NRTZ"][i2] < 1e-15
    assert m["NRTZ"][0] == 1.0 and m["RTZ"][0] == 0.5 and m["RTC"][0] == 0.0
    i4 = int(np.argmin(np.abs(w - 4)))
    assert m["RTC"][i4] < 1e-15
    assert np.all(np.array([m[k] for k in ("NRTZ", "RTZ", "RTC", "RTCZ")]) >= 0)


def test_order_series():
    rows = order_curves()
    assert len(rows) == 22 * 24
    assert {r["case"] for r in rows} >= {"1-I", "2-II", "6-IV"}
    hit = [r for r in rows if (r["pulse"], r["nb"], r["filter_type"]) == ("RTZ", 2, "I") and r["B_over_pi"] == 0.8]
    assert len(hit) == 1 and hit[0]["n_min"] == 12
    gap = max(abs(r["n_est"] - r["n_min"]) - r["eps_max"] for r in rows)
    assert gap <= 2
