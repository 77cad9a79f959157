"""Minimax design of linear-phase FIR equalizers for DAC pulses.

The complex equalization error

    E(wT) = H(e^{jwT}) P(jw)/T - exp(-j wT K)

factors, for every compatible pulse/filter pairing, into ``exp(-j wT K)`` times
the real error ``s A(wT) H_R(wT) - 1`` where ``s = -1`` for the pulses with a j
factor (the two j's multiply to -1) and ``s = +1`` otherwise. Minimizing its
peak modulus over the design band is a weighted Chebyshev problem with desired
response ``s/A`` and weight ``A``.

Both engines work with the zero-phase response written as
``Q(wT) p(x)``, where ``x = cos(wT)``, ``p`` is a polynomial of degree
``n_free - 1`` and ``Q`` is the fixed factor of the filter type (1, cos(wT/2),
sin(wT), sin(wT/2)). ``x`` is mapped affinely to ``t`` in [-1, 1] across the
band so the Remez iteration (barycentric form) and the LP (Chebyshev basis in
``t``) stay well conditioned for narrow bands and high orders.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import chebyshev as C
from scipy.optimize import linprog

from .bands import DEFAULT_DENSITY, BandSpec, FrequencyGrid, band_interval, make_grid
from .fir_types import (
    Delay,
    FirFilter,
    LinearPhaseType,
    check_parity,
    compatible,
    delay_K,
    expansion_basis,
    frequency_response,
    n_free,
)
from .pulses import PulseKind, pulse_amplitude, pulse_frequency_response, traits, valid_nyquist_bands

log = logging.getLogger(__name__)

DEFAULT_TOL = 1e-6
DEFAULT_MAX_ITER = 250


class DesignError(ValueError):
    """Invalid design configuration."""


class ConvergenceError(RuntimeError):
    """An engine failed to produce an acceptable solution."""


@dataclass(frozen=True)
class DesignProblem:
    kind: PulseKind
    band: BandSpec
    filter_type: LinearPhaseType
    order: int

    def __post_init__(self):
        kind = PulseKind.parse(self.kind)
        ftype = LinearPhaseType.parse(self.filter_type)
        object.__setattr__(self, "kind", kind)
        object.__setattr__(self, "filter_type", ftype)
        if not compatible(kind, ftype):
            raise DesignError(f"pulse {kind} cannot be equalized by a Type {ftype} filter")
        if self.band.nb not in valid_nyquist_bands(kind):
            bands = sorted(valid_nyquist_bands(kind))
            raise DesignError(f"pulse {kind} is not used in Nyquist band {self.band.nb} (valid: {bands})")
        try:
            check_parity(ftype, self.order)
        except ValueError as exc:
            raise DesignError(str(exc)) from None
        if n_free(ftype, self.order) < 1:
            raise DesignError(f"Type {ftype} with N={self.order} has no free coefficients")

    @classmethod
    def create(cls, kind, nb: int, filter_type, order: int, B: float) -> "DesignProblem":
        """Build a problem from loose values; ``B`` is in rad."""
        try:
            band = BandSpec(int(nb), float(B))
        except ValueError as exc:
            raise DesignError(str(exc)) from None
        return cls(PulseKind.parse(kind), band, LinearPhaseType.parse(filter_type), int(order))

    @property
    def n_free(self) -> int:
        return n_free(self.filter_type, self.order)

    @property
    def delay(self) -> Delay:
        return delay_K(self.filter_type, self.order, self.kind)

    def default_grid(self, density: int = DEFAULT_DENSITY) -> FrequencyGrid:
        return make_grid(self.band, self.n_free, density)


@dataclass
class DesignResult:
    filter: FirFilter
    delta_N: float
    extremal_frequencies: np.ndarray
    iterations: int
    engine: str
    delay: Delay
    converged: bool = True
    level: float = field(default=float("nan"))  # levelled reference error (Remez only)

    @property
    def coefficients(self) -> np.ndarray:
        return self.filter.coefficients


class ChebyshevData:
    """Weighted Chebyshev form of a design problem.

    ``|E(wT)| = weight(wT) * |desired(wT) - H_R(wT)|`` on the design band.
    """

    def __init__(self, problem: DesignProblem):
        self.problem = problem
        self.sign = -1.0 if traits(problem.kind).has_j_factor else 1.0
        self.lo, self.hi = band_interval(problem.band)
        self._x_lo, self._x_hi = np.cos(self.lo), np.cos(self.hi)

    def amplitude(self, wT):
        a = np.asarray(pulse_amplitude(self.problem.kind, wT))
        if np.any(a <= 0):
            raise DesignError(
                f"pulse {self.problem.kind} amplitude is not positive on the design band "
                f"(NB={self.problem.band.nb}, B={self.problem.band.B / np.pi:.4g}*pi)"
            )
        return a

    def desired(self, wT):
        return self.sign / self.amplitude(wT)

    def weight(self, wT):
        return self.amplitude(wT)

    def basis(self, wT) -> np.ndarray:
        return expansion_basis(self.problem.filter_type, self.problem.order, wT)

    def fixed_factor(self, wT):
        w = np.asarray(wT, dtype=float)
        t = self.problem.filter_type
        if t is LinearPhaseType.I:
            return np.ones_like(w)
        if t is LinearPhaseType.II:
            return np.cos(w / 2)
        if t is LinearPhaseType.III:
            return np.sin(w)
        return np.sin(w / 2)

    def to_t(self, x):
        """Affine map of x = cos(wT) from the band's x-range onto [-1, 1]."""
        return (2.0 * np.asarray(x) - (self._x_lo + self._x_hi)) / (self._x_hi - self._x_lo)

    def reduced(self, wT):
        """(t, target, weight) of the polynomial approximation problem."""
        w = np.asarray(wT, dtype=float)
        q = self.fixed_factor(w)
        if np.any(q == 0):
            raise DesignError("design band touches a structural zero of the filter type")
        a = self.amplitude(w)
        return self.to_t(np.cos(w)), self.sign / (a * q), a * np.abs(q)

    def expansion_from_t_cheb(self, ct: np.ndarray) -> np.ndarray:
        """Convert Chebyshev-in-t coefficients of p into the filter's expansion coefficients."""
        m = len(ct)
        if m == 1:
            alpha = np.array([ct[0]])
        else:
            # cos(k wT) = T_k(x): resample p on Chebyshev points in x and interpolate
            alpha = C.chebinterpolate(lambda x: C.chebval(self.to_t(x), ct), m - 1)
        return _alpha_to_expansion(self.problem.filter_type, alpha)


def _alpha_to_expansion(t: LinearPhaseType, alpha: np.ndarray) -> np.ndarray:
    """Multiply Q(wT) * sum alpha_k cos(k wT) out into the type's own expansion."""
    m = len(alpha)
    a = np.concatenate([alpha, [0.0]])
    if t is LinearPhaseType.I:
        return alpha.copy()
    out = np.zeros(m)
    if t is LinearPhaseType.II:
        out[0] = a[0] + a[1] / 2
        out[1:] = (a[1:m] + a[2 : m + 1]) / 2
    elif t is LinearPhaseType.IV:
        out[0] = a[0] - a[1] / 2
        out[1:] = (a[1:m] - a[2 : m + 1]) / 2
    else:
        # sin(w) cos(k w) = (sin((k+1) w) - sin((k-1) w)) / 2, c_j multiplies sin(j w)
        out[0] += a[0]
        for k in range(1, m):
            out[k] += a[k] / 2
            if k >= 2:
                out[k - 2] -= a[k] / 2
    return out


def reduce_to_chebyshev(problem: DesignProblem) -> ChebyshevData:
    return ChebyshevData(problem)


# --- barycentric helpers -------------------------------------------------


def _bary_weights(nodes: np.ndarray) -> np.ndarray:
    d = nodes[:, None] - nodes[None, :]
    np.fill_diagonal(d, 1.0)
    logs = -np.log(np.abs(d)).sum(axis=1)
    sign = np.where(np.count_nonzero(d < 0, axis=1) % 2, -1.0, 1.0)
    return sign * np.exp(logs - logs.max())


def _bary_eval(nodes, values, weights, x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if len(nodes) == 1:
        return np.full(x.shape, values[0])
    diff = x[:, None] - nodes[None, :]
    exact = diff == 0
    diff[exact] = 1.0
    k = weights / diff
    with np.errstate(divide="ignore", invalid="ignore"):
        out = (k @ values) / k.sum(axis=1)
    rows, cols = np.nonzero(exact)
    out[rows] = values[cols]
    return out


def _select_extrema(err: np.ndarray, count: int, ref=None, ref_signs=None) -> np.ndarray | None:
    """Pick ``count`` alternating-sign extrema of ``err``, largest first.

    ``ref``/``ref_signs`` pin the sign at the current reference points, where
    rounding can flip the sign of a very small levelled error.
    """
    s = np.where(err >= 0, 1, -1)
    if ref is not None:
        s[ref] = ref_signs
    starts = np.concatenate([[0], np.flatnonzero(np.diff(s)) + 1])
    ends = np.concatenate([starts[1:], [len(err)]])
    absd = np.abs(err)
    cand = [a + int(np.argmax(absd[a:b])) for a, b in zip(starts, ends)]
    vals = [absd[i] for i in cand]
    while len(cand) > count:
        i = int(np.argmin(vals))
        last = len(cand) - 1
        if i in (0, last):
            del cand[i], vals[i]
        elif len(cand) - count == 1:
            j = 0 if vals[0] < vals[last] else last
            del cand[j], vals[j]
        else:
            del cand[i], vals[i]
            # neighbours i-1 and i now share a sign; drop the smaller
            j = i - 1 if vals[i - 1] < vals[i] else i
            del cand[j], vals[j]
    if len(cand) < count:
        return None
    return np.asarray(cand)


@dataclass
class _RemezState:
    ext: np.ndarray
    err: np.ndarray
    level: float
    nodes: np.ndarray
    values: np.ndarray


def _remez_core(t, f, wgt, m, tol, max_iter):
    """Discrete weighted Chebyshev approximation of f by polynomials of degree m-1 in t."""
    G = len(t)
    ext = np.unique(np.round(np.linspace(0, G - 1, m + 1)).astype(int))
    if len(ext) != m + 1:
        raise ConvergenceError(f"grid of {G} points too coarse for {m} coefficients")
    signs = (-1.0) ** np.arange(m + 1)
    best = None
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        tn, fn, wn = t[ext], f[ext], wgt[ext]
        bw = _bary_weights(tn)
        level = float(bw @ fn / (bw @ (signs / wn)))
        values = fn - signs * level / wn
        nodes = tn[:m]
        p = _bary_eval(nodes, values[:m], _bary_weights(nodes), t)
        err = wgt * (f - p)
        state = _RemezState(ext, err, level, nodes, values[:m])
        peak = np.abs(err).max()
        if not np.isfinite(peak):
            # interpolation broke down (very high order, error near rounding level)
            log.info("non-finite error at iteration %d", it)
            break
        if best is None or peak < np.abs(best.err).max():
            best = state
        new = _select_extrema(err, m + 1, ext, np.where(signs * level >= 0, 1, -1))
        if new is None:
            log.info("extremum selection failed at iteration %d", it)
            break
        ripple = np.abs(err[new])
        if peak == 0 or (ripple.max() - ripple.min()) <= tol * ripple.max():
            best = _RemezState(new, err, level, nodes, values[:m])
            converged = True
            break
        if np.array_equal(new, ext):
            # exchange reached a fixed point; what remains is rounding in the interpolant
            best = _RemezState(new, err, level, nodes, values[:m])
            converged = (peak - abs(level)) <= 100 * tol * peak
            break
        ext = new
    if best is None:
        raise ConvergenceError("Remez exchange produced no finite approximation")
    return best, it, converged


def _t_cheb_from_bary(nodes, values, m) -> np.ndarray:
    if m == 1:
        return np.array([values[0]])
    bw = _bary_weights(nodes)
    return C.chebinterpolate(lambda x: _bary_eval(nodes, values, bw, x), m - 1)


def design_remez(
    problem: DesignProblem,
    grid: FrequencyGrid | None = None,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
) -> DesignResult:
    """Equiripple design by the multiple-exchange Remez algorithm on a grid."""
    grid = grid or problem.default_grid()
    cheb = reduce_to_chebyshev(problem)
    w = grid.points
    t, f, wgt = cheb.reduced(w)
    m = problem.n_free
    state, iters, converged = _remez_core(t, f, wgt, m, tol, max_iter)
    if not converged:
        log.info("Remez did not converge for %s after %d iterations", problem, iters)
    ct = _t_cheb_from_bary(state.nodes, state.values, m)
    filt = FirFilter(problem.filter_type, problem.order, cheb.expansion_from_t_cheb(ct))
    return DesignResult(
        filter=filt,
        delta_N=float(np.abs(state.err).max()),
        extremal_frequencies=w[np.sort(state.ext)],
        iterations=iters,
        engine="remez",
        delay=problem.delay,
        converged=converged,
        level=abs(state.level),
    )


def _epigraph_lp(phi: np.ndarray, target: np.ndarray, label) -> tuple[np.ndarray, float, int]:
    """min d s.t. |target - phi c| <= d; returns (c, d, iterations)."""
    n, m = phi.shape
    ones = np.ones((n, 1))
    A_ub = np.block([[-phi, -ones], [phi, -ones]])
    b_ub = np.concatenate([-target, target])
    cost = np.zeros(m + 1)
    cost[-1] = 1.0
    bounds = [(None, None)] * m + [(0, None)]
    tight = {"primal_feasibility_tolerance": 1e-10, "dual_feasibility_tolerance": 1e-10}
    # dual simplex first; HiGHS occasionally stalls on near-degenerate instances
    for method, options in (("highs-ds", tight), ("highs-ipm", tight), ("highs", {})):
        res = linprog(cost, A_ub=A_ub, b_ub=b_ub, bounds=bounds, method=method, options=options)
        if res.status == 0:
            return res.x[:m], float(res.x[-1]), int(res.nit)
        log.info("LP %s failed (%s), retrying", method, res.message)
    raise ConvergenceError(f"LP solver failed for {label}: {res.message}")


def design_lp(problem: DesignProblem, grid: FrequencyGrid | None = None, refine: int = 2) -> DesignResult:
    """Globally optimal design on the grid via the epigraph linear program.

    minimize d  subject to  -d <= weight * (desired - H_R) <= d  at every grid point.
    The solver's tolerances are absolute, so small errors are refined by
    re-solving for a correction against the residual scaled to unit size.
    """
    grid = grid or problem.default_grid()
    cheb = reduce_to_chebyshev(problem)
    w = grid.points
    t, f, wgt = cheb.reduced(w)
    m = problem.n_free
    phi = C.chebvander(t, m - 1) * wgt[:, None]
    wf = wgt * f
    ct, _, nit = _epigraph_lp(phi, wf, problem)
    for _ in range(refine):
        r = wf - phi @ ct
        scale = float(np.abs(r).max())
        if scale == 0 or scale > 1e-3:
            break
        dc, _, k = _epigraph_lp(phi, r / scale, problem)
        nit += k
        cand = ct + scale * dc
        if np.abs(wf - phi @ cand).max() >= scale:
            break
        ct = cand
    err = wgt * f - phi @ ct
    ext = _select_extrema(err, m + 1)
    if ext is None:
        ext = np.array([int(np.argmax(np.abs(err)))])
    filt = FirFilter(problem.filter_type, problem.order, cheb.expansion_from_t_cheb(ct))
    return DesignResult(
        filter=filt,
        delta_N=float(np.abs(err).max()),
        extremal_frequencies=w[ext],
        iterations=nit,
        engine="lp",
        delay=problem.delay,
        level=float(np.abs(err).max()),
    )


def design(
    problem: DesignProblem,
    engine: str = "remez",
    density: int = DEFAULT_DENSITY,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
    fallback: bool = True,
) -> DesignResult:
    """Design with the chosen engine; Remez falls back to the LP if it fails to converge."""
    grid = problem.default_grid(density)
    if engine == "lp":
        return design_lp(problem, grid)
    if engine != "remez":
        raise ValueError(f"unknown engine {engine!r}")
    try:
        result = design_remez(problem, grid, tol, max_iter)
    except ConvergenceError:
        if not fallback:
            raise
        return design_lp(problem, grid)
    if not result.converged and fallback:
        lp = design_lp(problem, grid)
        if lp.delta_N <= result.delta_N:
            return lp
    return result


def complex_error(result: DesignResult | FirFilter, problem: DesignProblem, wT, K: float | None = None):
    """E(wT) evaluated from the impulse response and the full pulse response."""
    filt = result.filter if isinstance(result, DesignResult) else result
    if K is None:
        K = problem.delay.K
    w = np.asarray(wT, dtype=float)
    return frequency_response(filt.coefficients, w) * pulse_frequency_response(problem.kind, w) - np.exp(
        -1j * w * K
    )


def verify_design(
    result: DesignResult | FirFilter,
    problem: DesignProblem,
    dense_factor: int = 8,
    density: int = DEFAULT_DENSITY,
) -> tuple[float, float]:
    """Peak |E| on a grid ``dense_factor`` times denser than the design grid.

    Works from h(n) and the complex pulse response only, independent of the
    real-valued reduction used by the design engines.
    """
    n = dense_factor * len(problem.default_grid(density))
    lo, hi = band_interval(problem.band)
    w = np.linspace(lo, hi, n)
    mag = np.abs(complex_error(result, problem, w))
    i = int(np.argmax(mag))
    return float(mag[i]), float(w[i])
