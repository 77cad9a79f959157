"""Minimal filter orders and (B, delta) sweeps of them."""
from __future__ import annotations

import logging
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .bands import DEFAULT_DENSITY
from .design import DEFAULT_MAX_ITER, DEFAULT_TOL, DesignError, DesignProblem, DesignResult, design
from .estimate import builtin_params, evaluate_estimate, round_to_order
from .fir_types import LinearPhaseType
from .pulses import PulseKind

log = logging.getLogger(__name__)

DEFAULT_ORDER_CAP = 400
FAILED = -1

DEFAULT_B_RANGE = (0.04 * np.pi, 0.96 * np.pi)
DEFAULT_DELTA_RANGE = (1e-5, 1e-1)
FULL_SHAPE = (150, 50)
DESK_SHAPE = (15, 10)


class OrderCapExceeded(RuntimeError):
    def __init__(self, spec, cap, best_delta):
        super().__init__(f"no order <= {cap} reaches delta={spec.delta:g} (best {best_delta:.4g})")
        self.cap = cap
        self.best_delta = best_delta


@dataclass(frozen=True)
class EngineSettings:
    engine: str = "remez"
    density: int = DEFAULT_DENSITY
    tol: float = DEFAULT_TOL
    max_iter: int = DEFAULT_MAX_ITER
    cap: int = DEFAULT_ORDER_CAP


@dataclass(frozen=True)
class OrderSpec:
    kind: PulseKind
    nb: int
    filter_type: LinearPhaseType
    B: float
    delta: float

    def __post_init__(self):
        object.__setattr__(self, "kind", PulseKind.parse(self.kind))
        object.__setattr__(self, "filter_type", LinearPhaseType.parse(self.filter_type))
        if not 0 < self.delta < 1:
            raise DesignError(f"accuracy must satisfy 0 < delta < 1, got {self.delta}")
        # validates the pulse/NB/type/B combination
        self.problem(self.filter_type.min_order)

    def problem(self, order: int) -> DesignProblem:
        return DesignProblem.create(self.kind, self.nb, self.filter_type, order, self.B)


class OrderCache:
    """Designs per order for one (pulse, NB, type, B); shared across accuracy targets."""

    def __init__(self, settings: EngineSettings):
        self.settings = settings
        self.results: dict[int, DesignResult] = {}
        self.calls = 0

    def get(self, spec: OrderSpec, order: int) -> DesignResult:
        if order not in self.results:
            s = self.settings
            self.results[order] = design(spec.problem(order), s.engine, s.density, s.tol, s.max_iter)
            self.calls += 1
        return self.results[order]


def initial_guess(spec: OrderSpec) -> int:
    try:
        params, _ = builtin_params(spec.kind, spec.nb, spec.filter_type)
    except KeyError:
        return spec.filter_type.min_order
    est = evaluate_estimate(params, spec.B, spec.delta)
    if not np.isfinite(est):
        return spec.filter_type.min_order
    return round_to_order(est, spec.filter_type)


def minimal_order(
    spec: OrderSpec,
    search_hint: int | None = None,
    settings: EngineSettings | None = None,
    cache: OrderCache | None = None,
) -> tuple[int, DesignResult]:
    """Smallest order of the right parity whose minimax error is <= spec.delta.

    Galloping steps from the hint bracket the answer, bisection over same-parity
    orders narrows it, and the result is certified by the design at N - 2 failing.
    """
    settings = settings or EngineSettings()
    cache = cache or OrderCache(settings)
    lo_order = spec.filter_type.min_order
    cap = settings.cap
    if cap < lo_order:
        raise ValueError(f"order cap {cap} is below the smallest valid order {lo_order}")
    cap -= (cap - lo_order) % 2

    def passes(n: int) -> bool:
        return cache.get(spec, n).delta_N <= spec.delta

    n = initial_guess(spec) if search_hint is None else round_to_order(search_hint, spec.filter_type)
    n = min(max(n, lo_order), cap)
    # orders known to fail (bad) and pass (good); answer lies in (bad, good]
    if passes(n):
        good, bad, step = n, None, 2
        while bad is None:
            cand = max(good - step, lo_order)
            if cand == good:
                bad = lo_order - 2  # nothing below the smallest order to certify against
            elif passes(cand):
                good, step = cand, step * 2
            else:
                bad = cand
    else:
        bad, good, step = n, None, 2
        while good is None:
            cand = min(bad + step, cap)
            if passes(cand):
                good = cand
            elif cand == cap:
                best = min(r.delta_N for r in cache.results.values())
                raise OrderCapExceeded(spec, cap, best)
            else:
                bad, step = cand, step * 2
    while good - bad > 2:
        mid = bad + 2 * ((good - bad) // 4)
        if mid == bad:
            mid += 2
        if passes(mid):
            good = mid
        else:
            bad = mid
    return good, cache.get(spec, good)


@dataclass
class SweepGrid:
    kind: PulseKind
    nb: int
    filter_type: LinearPhaseType
    B_values: np.ndarray
    delta_values: np.ndarray
    n_min: np.ndarray
    delta_achieved: np.ndarray
    iterations: np.ndarray
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        shape = (len(self.B_values), len(self.delta_values))
        for name in ("n_min", "delta_achieved", "iterations"):
            if np.shape(getattr(self, name)) != shape:
                raise ValueError(f"{name} has shape {np.shape(getattr(self, name))}, expected {shape}")

    @property
    def shape(self) -> tuple[int, int]:
        return self.n_min.shape

    @property
    def valid(self) -> np.ndarray:
        return self.n_min != FAILED


def sweep_axes(B_range, nB: int, delta_range, nD: int) -> tuple[np.ndarray, np.ndarray]:
    """Linear bandwidth axis and logarithmic accuracy axis."""
    if nB < 2 or nD < 2:
        raise ValueError("sweep axes need at least two points each")
    B = np.linspace(B_range[0], B_range[1], nB)
    D = np.logspace(np.log10(delta_range[0]), np.log10(delta_range[1]), nD)
    return B, D


def sweep_row(kind, nb, filter_type, B: float, deltas, settings: EngineSettings, warm: bool = True):
    """Minimal orders at one bandwidth for every accuracy in ``deltas``.

    Returns (n_min, delta_achieved, iterations, design_calls). Failed cells hold FAILED.
    """
    cache = OrderCache(settings)
    calls = 0
    out_n = np.full(len(deltas), FAILED, dtype=int)
    out_d = np.full(len(deltas), np.nan)
    out_it = np.zeros(len(deltas), dtype=int)
    hint = None
    # coarse accuracy first: cheapest orders, and each answer bounds the next from below
    for j in np.argsort(deltas)[::-1]:
        spec = OrderSpec(kind, nb, filter_type, float(B), float(deltas[j]))
        if not warm:
            calls += cache.calls
            cache = OrderCache(settings)
        try:
            # finer accuracy never needs a lower order than the previous answer
            start = max(hint, initial_guess(spec)) if warm and hint is not None else None
            n, res = minimal_order(spec, start, settings, cache)
        except (OrderCapExceeded, DesignError, RuntimeError) as exc:
            log.warning("sweep cell B=%.4g*pi delta=%.3g failed: %s", B / np.pi, deltas[j], exc)
            continue
        out_n[j], out_d[j], out_it[j] = n, res.delta_N, res.iterations
        hint = n
    return out_n, out_d, out_it, calls + cache.calls


def _row_job(args):
    return sweep_row(*args)


def sweep(
    kind,
    nb: int,
    filter_type,
    B_range=DEFAULT_B_RANGE,
    nB: int = DESK_SHAPE[0],
    delta_range=DEFAULT_DELTA_RANGE,
    nD: int = DESK_SHAPE[1],
    settings: EngineSettings | None = None,
    workers: int | None = 1,
    warm: bool = True,
) -> SweepGrid:
    """Minimal-order matrix over a (B, delta) grid.

    Rows (bandwidths) are independent and may run in ``workers`` processes
    (None = all cores); the result does not depend on the worker count.
    """
    kind = PulseKind.parse(kind)
    filter_type = LinearPhaseType.parse(filter_type)
    settings = settings or EngineSettings()
    B_vals, D_vals = sweep_axes(B_range, nB, delta_range, nD)
    jobs = [(kind, nb, filter_type, B, D_vals, settings, warm) for B in B_vals]
    workers = workers or os.cpu_count() or 1
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_row_job, jobs))
    else:
        rows = [_row_job(j) for j in jobs]
    n_min = np.array([r[0] for r in rows])
    meta = {
        "engine": settings.engine,
        "density": settings.density,
        "tol": settings.tol,
        "max_iter": settings.max_iter,
        "cap": settings.cap,
        "design_calls": int(sum(r[3] for r in rows)),
        "timestamp": time.strftime("%Y-%m-%dT%H:%M:%S"),
    }
    return SweepGrid(
        kind,
        nb,
        filter_type,
        B_vals,
        D_vals,
        n_min,
        np.array([r[1] for r in rows]),
        np.array([r[2] for r in rows]),
        meta,
    )
