"""Series behind the pulse, magnitude-response and filter-order figures."""
from __future__ import annotations

import csv
import io
from pathlib import Path

import numpy as np

from .estimate import builtin_params, evaluate_estimate, table_rows
from .files import atomic_write
from .pulses import PulseKind, pulse_frequency_response, pulse_waveform
from .search import FAILED, EngineSettings, OrderCapExceeded, OrderSpec, minimal_order


def pulse_shapes(n: int = 401) -> dict[str, np.ndarray]:
    """Unit-height pulse shapes over t/T in [-0.25, 1.25]."""
    t = np.linspace(-0.25, 1.25, n)
    out = {"t_over_T": t}
    for k in PulseKind:
        out[k.name] = pulse_waveform(k, t)
    return out


def magnitude_responses(n: int = 1201, n_bands: int = 6) -> dict[str, np.ndarray]:
    """|P(jw)|/T over wT in [0, n_bands * pi]."""
    w = np.linspace(0.0, n_bands * np.pi, n)
    out = {"wT_over_pi": w / np.pi}
    for k in PulseKind:
        out[k.name] = np.abs(pulse_frequency_response(k, w))
    return out


def order_curves(delta: float = 1e-3, B_over_pi=None, settings: EngineSettings | None = None) -> list[dict]:
    """Minimal and estimated orders versus bandwidth for every built-in case."""
    if B_over_pi is None:
        B_over_pi = np.round(np.arange(1, 25) * 0.04, 10)
    rows = []
    for kind, nb, t in table_rows():
        params, eps_max = builtin_params(kind, nb, t)
        hint = None
        for b in B_over_pi:
            B = float(b) * np.pi
            try:
                n, _ = minimal_order(OrderSpec(kind, nb, t, B, delta), hint, settings)
                hint = n
            except OrderCapExceeded:
                n = FAILED
            rows.append(
                {
                    "case": f"{nb}-{t.name}",
                    "pulse": kind.name,
                    "nb": nb,
                    "filter_type": t.name,
                    "B_over_pi": float(b),
                    "delta": delta,
                    "n_min": "" if n == FAILED else n,
                    "n_est": float(evaluate_estimate(params, B, delta)),
                    "eps_max": eps_max,
                }
            )
    return rows


def _columns_csv(cols: dict[str, np.ndarray]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(cols)
    for row in zip(*cols.values()):
        w.writerow([repr(float(v)) for v in row])
    return buf.getvalue()


def _records_csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
    w.writeheader()
    w.writerows(rows)
    return buf.getvalue()


def write_plot_data(outdir, which=("pulses", "magnitude", "orders"), delta: float = 1e-3, B_over_pi=None,
                    settings: EngineSettings | None = None) -> list[Path]:
    outdir = Path(outdir)
    written = []
    if "pulses" in which:
        p = outdir / "pulses.csv"
        atomic_write(p, _columns_csv(pulse_shapes()))
        written.append(p)
    if "magnitude" in which:
        p = outdir / "magnitude.csv"
        atomic_write(p, _columns_csv(magnitude_responses()))
        written.append(p)
    if "orders" in which:
        p = outdir / "orders.csv"
        atomic_write(p, _records_csv(order_curves(delta, B_over_pi, settings)))
        written.append(p)
    return written
