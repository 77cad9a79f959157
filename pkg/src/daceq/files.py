"""File formats: filter JSON, sweep CSV (+ metadata sidecar), parameter JSON."""
from __future__ import annotations

import csv
import io
import json
import math
import os
import tempfile
from pathlib import Path

import numpy as np

from .design import DesignProblem, DesignResult
from .estimate import PARAM_NAMES, EstimateParams
from .fir_types import FirFilter, LinearPhaseType
from .pulses import PulseKind
from .search import FAILED, SweepGrid

SCHEMA_VERSION = 1
SWEEP_COLUMNS = ("B_over_pi", "delta", "n_min", "delta_achieved", "engine_iterations")
CACHE_ENV = "DACEQ_CACHE_DIR"


class FormatError(ValueError):
    """A file does not follow the expected schema."""


def atomic_write(path, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def cache_dir() -> Path:
    return Path(os.environ.get(CACHE_ENV) or ".daceq_cache")


# --- filters ------------------------------------------------------------


def filter_to_dict(result: DesignResult, problem: DesignProblem) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "pulse": problem.kind.name,
        "nb": problem.band.nb,
        "filter_type": problem.filter_type.name,
        "order": problem.order,
        "bandwidth_over_pi": problem.band.B / math.pi,
        "delay_K": result.delay.K,
        "delta_achieved": result.delta_N,
        "engine": result.engine,
        "coefficients": [float(h) for h in result.coefficients],
    }


def write_filter(path, result: DesignResult, problem: DesignProblem) -> None:
    atomic_write(path, json.dumps(filter_to_dict(result, problem), indent=2) + "\n")


def read_filter(path) -> tuple[FirFilter, DesignProblem, dict]:
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: not valid JSON ({exc})") from None
    missing = {"schema_version", "pulse", "nb", "filter_type", "order", "bandwidth_over_pi", "coefficients"} - set(data)
    if missing:
        raise FormatError(f"{path}: missing fields {sorted(missing)}")
    if data["schema_version"] != SCHEMA_VERSION:
        raise FormatError(f"{path}: unsupported schema_version {data['schema_version']}")
    problem = DesignProblem.create(
        data["pulse"], data["nb"], data["filter_type"], data["order"], data["bandwidth_over_pi"] * math.pi
    )
    h = np.asarray(data["coefficients"], dtype=float)
    if len(h) != problem.order + 1:
        raise FormatError(f"{path}: {len(h)} coefficients for order {problem.order}")
    try:
        filt = FirFilter.from_impulse(problem.filter_type, h)
    except ValueError as exc:
        raise FormatError(f"{path}: {exc}") from None
    return filt, problem, data


# --- parameter sets -----------------------------------------------------


def params_to_dict(params: EstimateParams, eps_max: float | None) -> dict:
    d = {n: getattr(params, n) for n in PARAM_NAMES}
    d["eps_max"] = eps_max
    d["provenance"] = dict(params.provenance)
    return d


def write_params(path, params: EstimateParams, eps_max: float | None) -> None:
    atomic_write(path, json.dumps(params_to_dict(params, eps_max), indent=2) + "\n")


def read_params(path) -> tuple[EstimateParams, float | None]:
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: not valid JSON ({exc})") from None
    missing = set(PARAM_NAMES) - set(data)
    if missing:
        raise FormatError(f"{path}: missing parameters {sorted(missing)}")
    params = EstimateParams(*(float(data[n]) for n in PARAM_NAMES), provenance=dict(data.get("provenance") or {}))
    eps = data.get("eps_max")
    return params, None if eps is None else float(eps)


# --- sweeps -------------------------------------------------------------


def sweep_rows(B: float, deltas, n_min, delta_achieved, iterations) -> list[dict]:
    rows = []
    for d, n, da, it in zip(deltas, n_min, delta_achieved, iterations):
        failed = int(n) == FAILED
        rows.append(
            {
                "B_over_pi": repr(float(B) / math.pi),
                "delta": repr(float(d)),
                "n_min": "" if failed else str(int(n)),
                "delta_achieved": "" if failed else repr(float(da)),
                "engine_iterations": "" if failed else str(int(it)),
            }
        )
    return rows


def format_sweep_csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=SWEEP_COLUMNS, lineterminator="\n")
    writer.writeheader()
    writer.writerows(rows)
    return buf.getvalue()


def read_sweep_rows(path) -> list[dict]:
    path = Path(path)
    if not path.exists():
        return []
    with path.open(encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        if tuple(reader.fieldnames or ()) != SWEEP_COLUMNS:
            raise FormatError(f"{path}: header must be {','.join(SWEEP_COLUMNS)}")
        return list(reader)


def meta_path(csv_path) -> Path:
    p = Path(csv_path)
    return p.with_name(p.name + ".meta.json")


def write_sweep(path, grid: SweepGrid) -> None:
    rows = []
    for i, B in enumerate(grid.B_values):
        rows += sweep_rows(B, grid.delta_values, grid.n_min[i], grid.delta_achieved[i], grid.iterations[i])
    atomic_write(path, format_sweep_csv(rows))
    atomic_write(meta_path(path), json.dumps(sweep_metadata(grid), indent=2) + "\n")


def sweep_metadata(grid: SweepGrid) -> dict:
    return {
        "pulse": grid.kind.name,
        "nb": int(grid.nb),
        "filter_type": grid.filter_type.name,
        "B_over_pi": [float(b) / math.pi for b in grid.B_values],
        "delta": [float(d) for d in grid.delta_values],
        **{k: v for k, v in grid.metadata.items()},
    }


def grid_from_rows(rows: list[dict], kind, nb, filter_type, metadata: dict | None = None) -> SweepGrid:
    if not rows:
        raise FormatError("sweep file has no data rows")
    b_axis = sorted({float(r["B_over_pi"]) for r in rows})
    d_axis = sorted({float(r["delta"]) for r in rows})
    bi = {b: i for i, b in enumerate(b_axis)}
    di = {d: j for j, d in enumerate(d_axis)}
    shape = (len(b_axis), len(d_axis))
    n_min = np.full(shape, FAILED, dtype=int)
    da = np.full(shape, np.nan)
    its = np.zeros(shape, dtype=int)
    seen = np.zeros(shape, dtype=bool)
    for r in rows:
        i, j = bi[float(r["B_over_pi"])], di[float(r["delta"])]
        seen[i, j] = True
        if r["n_min"] != "":
            n_min[i, j] = int(r["n_min"])
            da[i, j] = float(r["delta_achieved"])
            its[i, j] = int(r["engine_iterations"] or 0)
    if not seen.all():
        raise FormatError(f"sweep file is not a complete rectangular grid ({int(seen.sum())} of {seen.size} cells)")
    return SweepGrid(
        PulseKind.parse(kind),
        int(nb),
        LinearPhaseType.parse(filter_type),
        np.array(b_axis) * math.pi,
        np.array(d_axis),
        n_min,
        da,
        its,
        dict(metadata or {}),
    )


def read_sweep(path, kind=None, nb=None, filter_type=None) -> SweepGrid:
    """Load a sweep CSV; case identity comes from the arguments or the metadata sidecar."""
    meta = {}
    mp = meta_path(path)
    if mp.exists():
        meta = json.loads(mp.read_text(encoding="utf-8"))
    kind = kind or meta.get("pulse")
    nb = nb or meta.get("nb")
    filter_type = filter_type or meta.get("filter_type")
    if kind is None or nb is None or filter_type is None:
        raise FormatError(f"{path}: pulse/nb/type unknown (no metadata sidecar); pass them explicitly")
    return grid_from_rows(read_sweep_rows(path), kind, nb, filter_type, meta)
