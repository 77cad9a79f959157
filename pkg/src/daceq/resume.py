"""Sweeps backed by a CSV cache that survives interruption."""
from __future__ import annotations

import json
import logging
import math
import os
from concurrent.futures import ProcessPoolExecutor, as_completed

from .files import FormatError, atomic_write, format_sweep_csv, meta_path, read_sweep_rows, sweep_rows, grid_from_rows
from .fir_types import LinearPhaseType
from .pulses import PulseKind
from .search import (
    DESK_SHAPE,
    DEFAULT_B_RANGE,
    DEFAULT_DELTA_RANGE,
    EngineSettings,
    SweepGrid,
    sweep_axes,
    sweep_row,
)

log = logging.getLogger(__name__)


def _same(a: float, b: float) -> bool:
    return math.isclose(a, b, rel_tol=1e-12, abs_tol=1e-15)


def resumable_sweep(
    path,
    kind,
    nb: int,
    filter_type,
    B_range=DEFAULT_B_RANGE,
    nB: int = DESK_SHAPE[0],
    delta_range=DEFAULT_DELTA_RANGE,
    nD: int = DESK_SHAPE[1],
    settings: EngineSettings | None = None,
    workers: int | None = 1,
) -> tuple[SweepGrid, int]:
    """Run (or finish) a sweep whose rows are cached in ``path``.

    Bandwidth rows already complete in the file are not recomputed; every
    finished row is written immediately. Returns the grid and the number of
    designs computed by this call.
    """
    kind = PulseKind.parse(kind)
    filter_type = LinearPhaseType.parse(filter_type)
    settings = settings or EngineSettings()
    B_vals, D_vals = sweep_axes(B_range, nB, delta_range, nD)
    meta = {
        "pulse": kind.name,
        "nb": int(nb),
        "filter_type": filter_type.name,
        "B_over_pi": [float(b) / math.pi for b in B_vals],
        "delta": [float(d) for d in D_vals],
        "engine": settings.engine,
        "density": settings.density,
        "tol": settings.tol,
        "max_iter": settings.max_iter,
        "cap": settings.cap,
    }
    mp = meta_path(path)
    if mp.exists():
        old = json.loads(mp.read_text(encoding="utf-8"))
        for key in ("pulse", "nb", "filter_type", "engine", "density", "tol", "max_iter", "cap"):
            if old.get(key) != meta[key]:
                raise FormatError(f"{path}: cached sweep has {key}={old.get(key)!r}, requested {meta[key]!r}")
    else:
        atomic_write(mp, json.dumps(meta, indent=2) + "\n")

    rows = read_sweep_rows(path)
    done = []
    for B in B_vals:
        b = float(B) / math.pi
        have = [r for r in rows if _same(float(r["B_over_pi"]), b)]
        if len(have) == len(D_vals) and all(
            any(_same(float(r["delta"]), float(d)) for r in have) for d in D_vals
        ):
            done.append(B)
    todo = [B for B in B_vals if B not in done]
    # keep only rows belonging to completed bandwidths; partial rows are recomputed
    rows = [r for r in rows if any(_same(float(r["B_over_pi"]), float(B) / math.pi) for B in done)]
    calls = 0

    def record(B, out):
        nonlocal rows, calls
        n, da, it, c = out
        calls += c
        rows += sweep_rows(B, D_vals, n, da, it)
        atomic_write(path, format_sweep_csv(rows))

    if not todo:
        atomic_write(path, format_sweep_csv(rows))
    workers = workers or os.cpu_count() or 1
    if workers > 1 and len(todo) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = {pool.submit(sweep_row, kind, nb, filter_type, B, D_vals, settings): B for B in todo}
            for fut in as_completed(futures):
                record(futures[fut], fut.result())
    else:
        for B in todo:
            record(B, sweep_row(kind, nb, filter_type, B, D_vals, settings))
    log.info("sweep %s: %d rows cached, %d computed, %d designs", path, len(done), len(todo), calls)
    grid = grid_from_rows(rows, kind, nb, filter_type, meta)
    # axes from the file are rounded through B/pi; use the exact ones
    grid.B_values, grid.delta_values = B_vals, D_vals
    return grid, calls
