"""Minimax fitting of the refined order estimate to a grid of minimal orders.

The estimate is linear in (a1, b1, c) once the scale and exponent parameters
(a2, a3, a4, b2, b3, b4) are fixed, so the minimax problem over the linear
parameters is a small LP solved exactly. The outer search runs over the six
nonlinear parameters:

1. least-squares fits from the initialization and seeded perturbations of it
   locate a good basin (the least-squares surface is smooth, the max is not);
2. Nelder-Mead on the exact inner-minimax value polishes the best candidate.

The term-ordering rule ``a4 <= b4`` keeps the two terms from swapping roles;
a2 and b2 are searched in log10 space.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import least_squares, linprog, minimize

from .estimate import DEFAULT_POWER, PARAM_NAMES, EstimateParams, evaluate_estimate, power
from .search import SweepGrid

log = logging.getLogger(__name__)

LINEAR = ("a1", "b1", "c")
NONLINEAR = ("a2", "a3", "a4", "b2", "b3", "b4")
LOG_SCALED = ("a2", "b2")
BOUNDS = {
    "a2": (1e-8, 1e3),
    "b2": (1e-8, 1e3),
    "a3": (-2.0, 4.0),
    "b3": (-2.0, 4.0),
    "a4": (0.5, 3.0),
    "b4": (0.5, 3.0),
    "a1": (-20.0, 20.0),
    "b1": (-20.0, 20.0),
    "c": (-20.0, 20.0),
}
FALLBACK_STEP2 = (-2.0, 1.0, 0.0)
# spread of the restart perturbations, in internal (log10 for a2/b2) coordinates
_PERTURB = {"a1": 1.0, "b1": 1.0, "c": 1.0, "a2": 1.0, "b2": 1.0, "a3": 0.3, "b3": 0.5, "a4": 0.2, "b4": 0.3}


def default_init(kind=None, nb=None, t=None, step2_a=None, step2_b=None, step2_c=None) -> EstimateParams:
    """Start from the three-term estimate: a1=a, b1=b, c, unit scales, powers 1 and 2.

    Without three-term coefficients the documented fallback a=-2, b=1, c=0 is used.
    """
    if step2_a is None or step2_b is None or step2_c is None:
        a, b, c = FALLBACK_STEP2
        source = "fallback"
    else:
        a, b, c = float(step2_a), float(step2_b), float(step2_c)
        source = "step2"
    prov = {"source": "init", "init": source}
    if kind is not None:
        prov.update(pulse=str(kind), nb=nb, filter_type=str(t))
    return EstimateParams(a, 1.0, 1.0, 1.0, b, 1.0, 2.0, 2.0, c, provenance=prov)


def _cells(grid: SweepGrid):
    BB, DD = np.meshgrid(grid.B_values, grid.delta_values, indexing="ij")
    ok = grid.valid
    return BB[ok], DD[ok], grid.n_min[ok].astype(float)


def max_estimation_error(params: EstimateParams, grid: SweepGrid, convention: str = DEFAULT_POWER):
    """Largest |N_est - N_min| over the non-failed cells, and the (i, j) cell attaining it."""
    ok = grid.valid
    if not ok.any():
        raise ValueError("grid has no valid cells")
    BB, DD = np.meshgrid(grid.B_values, grid.delta_values, indexing="ij")
    err = np.abs(evaluate_estimate(params, BB, DD, convention) - grid.n_min)
    err = np.where(ok, err, -np.inf)
    err = np.where(np.isnan(err), np.inf, err)
    i, j = np.unravel_index(int(np.argmax(err)), err.shape)
    return float(err[i, j]), (int(i), int(j))


@dataclass
class FitProblem:
    grid: SweepGrid
    init: EstimateParams | None = None
    bounds: dict = field(default_factory=lambda: dict(BOUNDS))
    frozen: dict = field(default_factory=dict)
    convention: str = DEFAULT_POWER

    def __post_init__(self):
        unknown = set(self.frozen) - set(PARAM_NAMES)
        if unknown:
            raise ValueError(f"unknown frozen parameters: {sorted(unknown)}")
        if self.init is None:
            self.init = default_init()
        if not self.grid.valid.any():
            raise ValueError("grid has no valid cells to fit")
        if not self.init.satisfies_constraints():
            raise ValueError("initial parameters violate a2, b2 > 0 and a4 <= b4")
        vals = self.init.as_array()
        for k, v in self.frozen.items():
            vals[PARAM_NAMES.index(k)] = v
        self.init = EstimateParams.from_array(vals, self.init.provenance)


@dataclass
class FitResult:
    params: EstimateParams
    eps: float
    iterations: int
    converged: bool
    init_eps: float = float("nan")


class _Objective:
    """Inner-LP minimax value as a function of the free nonlinear parameters."""

    def __init__(self, problem: FitProblem):
        self.problem = problem
        self.B, self.D, self.N = _cells(problem.grid)
        self.gap = np.pi - self.B
        self.base = problem.init.as_array()
        self.frozen = problem.frozen
        # a term whose coefficient is frozen at zero has no identifiable shape
        idle = {n for t in "ab" if self.frozen.get(f"{t}1") == 0 for n in (f"{t}2", f"{t}3", f"{t}4")}
        self.free_nl = [n for n in NONLINEAR if n not in self.frozen and n not in idle]
        self.free_lin = [n for n in LINEAR if n not in self.frozen]
        self.lo = np.array([self._to_internal(n, problem.bounds[n][0]) for n in self.free_nl])
        self.hi = np.array([self._to_internal(n, problem.bounds[n][1]) for n in self.free_nl])
        self.evaluations = 0

    @staticmethod
    def _to_internal(name, v):
        return np.log10(v) if name in LOG_SCALED else float(v)

    @staticmethod
    def _from_internal(name, v):
        return 10.0**v if name in LOG_SCALED else float(v)

    def pack(self, params: EstimateParams) -> np.ndarray:
        return np.array([self._to_internal(n, getattr(params, n)) for n in self.free_nl])

    def full(self, u, lin=None) -> np.ndarray:
        vals = self.base.copy()
        for n, v in zip(self.free_nl, u):
            vals[PARAM_NAMES.index(n)] = self._from_internal(n, v)
        if lin is not None:
            for n, v in zip(self.free_lin, lin):
                vals[PARAM_NAMES.index(n)] = v
        return vals

    def feasible(self, vals) -> bool:
        p = dict(zip(PARAM_NAMES, vals))
        if not p["a4"] <= p["b4"]:
            return False
        for n, (lo, hi) in self.problem.bounds.items():
            if n not in self.frozen and not lo <= p[n] <= hi:
                return False
        return True

    def columns(self, vals):
        p = dict(zip(PARAM_NAMES, vals))
        conv = self.problem.convention
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            ta = power(np.log10(p["a2"] * self.D), p["a3"], conv) / self.gap ** p["a4"]
            tb = power(np.log10(p["b2"] * self.D), p["b3"], conv) / self.gap ** p["b4"]
        return {"a1": ta, "b1": tb, "c": np.ones_like(ta)}

    def residual(self, vals) -> np.ndarray:
        cols = self.columns(vals)
        p = dict(zip(PARAM_NAMES, vals))
        return sum(p[n] * cols[n] for n in LINEAR) - self.N

    def inner(self, u):
        """(eps, full parameter vector) with the linear parameters minimax-optimal."""
        vals = self.full(u)
        if not self.feasible(vals):
            return np.inf, vals
        self.evaluations += 1
        cols = self.columns(vals)
        p = dict(zip(PARAM_NAMES, vals))
        target = self.N - sum(p[n] * cols[n] for n in self.frozen if n in LINEAR)
        if not self.free_lin:
            return float(np.abs(target).max()), vals
        phi = np.column_stack([cols[n] for n in self.free_lin])
        if not np.all(np.isfinite(phi)):
            return np.inf, vals
        k = phi.shape[1]
        one = np.ones((len(target), 1))
        res = linprog(
            np.r_[np.zeros(k), 1.0],
            A_ub=np.block([[phi, -one], [-phi, -one]]),
            b_ub=np.r_[target, -target],
            bounds=[self.problem.bounds[n] for n in self.free_lin] + [(0, None)],
            method="highs-ds",
        )
        if res.status != 0:
            return np.inf, vals
        lin = res.x[:k]
        vals = self.full(u, lin)
        # report the directly evaluated max, not the LP's objective
        return float(np.abs(self.residual(vals)).max()), vals

    def value(self, u) -> float:
        return self.inner(u)[0]


def _least_squares_start(obj: _Objective, start: np.ndarray, max_nfev: int):
    """Smooth fit of all free parameters from one starting vector (full, external units)."""
    names = obj.free_nl + obj.free_lin
    lo = np.r_[obj.lo, [obj.problem.bounds[n][0] for n in obj.free_lin]]
    hi = np.r_[obj.hi, [obj.problem.bounds[n][1] for n in obj.free_lin]]
    x0 = np.r_[
        [obj._to_internal(n, start[PARAM_NAMES.index(n)]) for n in obj.free_nl],
        [start[PARAM_NAMES.index(n)] for n in obj.free_lin],
    ]
    span = np.where(np.isfinite(hi - lo), hi - lo, 1.0)
    x0 = np.clip(x0, lo + 1e-6 * span, hi - 1e-6 * span)
    nn = len(obj.free_nl)

    def full(x):
        vals = obj.full(x[:nn])
        for n, v in zip(obj.free_lin, x[nn:]):
            vals[PARAM_NAMES.index(n)] = v
        return vals

    def resid(x):
        vals = full(x)
        p = dict(zip(PARAM_NAMES, vals))
        r = obj.residual(vals)
        r = np.where(np.isfinite(r), r, 1e6)
        return np.r_[r, 100.0 * max(0.0, p["a4"] - p["b4"])]

    if not names:
        return start
    try:
        sol = least_squares(resid, x0, bounds=(lo, hi), method="trf", max_nfev=max_nfev)
    except ValueError as exc:
        log.debug("least-squares start failed: %s", exc)
        return None
    return full(sol.x)


def fit(
    problem: FitProblem,
    max_iter: int = 1500,
    tol: float = 1e-10,
    seed: int = 0,
    restarts: int = 5,
    polish_rounds: int = 3,
) -> FitResult:
    """Locally minimax-optimal estimate parameters for ``problem.grid``.

    ``restarts`` least-squares starts (the initialization plus seeded
    perturbations) are followed by ``polish_rounds`` Nelder-Mead runs of at most
    ``max_iter`` evaluations each on the exact max-error objective. The result
    is never worse than the initialization.
    """
    obj = _Objective(problem)
    init = problem.init.as_array()
    init_eps = float(np.abs(obj.residual(init)).max())
    best_vals, best_eps = init, init_eps

    def consider(vals, eps):
        nonlocal best_vals, best_eps
        if eps < best_eps and obj.feasible(vals):
            best_vals, best_eps = vals, eps

    rng = np.random.default_rng(seed)
    candidates = []
    for k in range(max(restarts, 1)):
        start = init.copy()
        if k:
            for n in obj.free_nl + obj.free_lin:
                i = PARAM_NAMES.index(n)
                if n in LOG_SCALED:
                    start[i] = start[i] * 10.0 ** rng.normal(0, _PERTURB[n])
                else:
                    start[i] = start[i] + rng.normal(0, _PERTURB[n])
            a4, b4 = PARAM_NAMES.index("a4"), PARAM_NAMES.index("b4")
            if start[a4] > start[b4]:
                start[a4], start[b4] = start[b4], start[a4]
        vals = _least_squares_start(obj, start, max_nfev=20 * max_iter)
        if vals is None or not obj.feasible(vals):
            continue
        eps_ls = float(np.abs(obj.residual(vals)).max())
        consider(vals, eps_ls)
        eps_vp, vals_vp = obj.inner(obj.pack(EstimateParams.from_array(vals)))
        consider(vals_vp, eps_vp)
        candidates.append((min(eps_ls, eps_vp), vals_vp if eps_vp <= eps_ls else vals))

    iterations = 0
    converged = False
    if obj.free_nl:
        start_vals = min(candidates, key=lambda c: c[0])[1] if candidates else best_vals
        u = obj.pack(EstimateParams.from_array(start_vals))
        prev = np.inf
        for _ in range(polish_rounds):
            res = minimize(
                obj.value,
                u,
                method="Nelder-Mead",
                options={"maxfev": max_iter, "xatol": 1e-7, "fatol": tol, "adaptive": True},
            )
            iterations += int(res.nit)
            eps, vals = obj.inner(res.x)
            consider(vals, eps)
            u = res.x
            converged = bool(res.success)
            if prev - res.fun <= tol:
                break
            prev = res.fun
    else:
        eps, vals = obj.inner(np.zeros(0))
        consider(vals, eps)
        converged = True

    grid = problem.grid
    prov = {
        "source": "fitted",
        "pulse": str(grid.kind),
        "nb": int(grid.nb),
        "filter_type": str(grid.filter_type),
        "grid_shape": list(grid.shape),
        "seed": seed,
        "restarts": restarts,
        "convention": problem.convention,
        "init": dict(problem.init.provenance),
    }
    params = EstimateParams.from_array(best_vals, prov)
    eps, _ = max_estimation_error(params, grid, problem.convention)
    return FitResult(params, eps, iterations, converged, init_eps)
