"""Linear-phase FIR filter types, zero-phase responses and equalized delays."""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .pulses import PulseKind


class LinearPhaseType(enum.Enum):
    I = 1
    II = 2
    III = 3
    IV = 4

    @classmethod
    def parse(cls, value: "str | int | LinearPhaseType") -> "LinearPhaseType":
        if isinstance(value, cls):
            return value
        if isinstance(value, (int, np.integer)):
            return cls(int(value))
        s = str(value).strip().upper()
        if s.isdigit():
            return cls(int(s))
        try:
            return cls[s]
        except KeyError:
            raise ValueError(f"unknown filter type {value!r}; expected I, II, III or IV") from None

    @property
    def even_order(self) -> bool:
        return self in (LinearPhaseType.I, LinearPhaseType.III)

    @property
    def symmetric(self) -> bool:
        return self in (LinearPhaseType.I, LinearPhaseType.II)

    @property
    def min_order(self) -> int:
        """Smallest order of the right parity with at least one free coefficient."""
        return {1: 0, 2: 1, 3: 2, 4: 1}[self.value]

    def __str__(self) -> str:
        return self.name


def check_parity(t: LinearPhaseType, order: int) -> None:
    if order < 0:
        raise ValueError(f"filter order must be non-negative, got {order}")
    if (order % 2 == 0) != t.even_order:
        want = "even" if t.even_order else "odd"
        raise ValueError(f"Type {t} filters need {want} order, got N={order}")


def n_free(t: LinearPhaseType, order: int) -> int:
    """Number of free expansion coefficients (equals the multiplier count)."""
    check_parity(t, order)
    if t is LinearPhaseType.I:
        return order // 2 + 1
    if t is LinearPhaseType.III:
        return order // 2
    return (order + 1) // 2


def multiplier_count(t: LinearPhaseType | str, order: int) -> int:
    return n_free(LinearPhaseType.parse(t), order)


def structural_zeros(t: LinearPhaseType | str) -> list[float]:
    t = LinearPhaseType.parse(t)
    return {
        LinearPhaseType.I: [],
        LinearPhaseType.II: [np.pi],
        LinearPhaseType.III: [0.0, np.pi],
        LinearPhaseType.IV: [0.0],
    }[t]


def compatible(kind: PulseKind | str, t: LinearPhaseType | str) -> bool:
    """True when the filter type can equalize the pulse with linear overall phase.

    Pulses carrying a j factor need an antisymmetric filter so the two j's combine
    into a real constant.
    """
    kind = PulseKind.parse(kind)
    t = LinearPhaseType.parse(t)
    if kind in (PulseKind.NRTZ, PulseKind.RTZ):
        return t.symmetric
    return not t.symmetric


_DELAY_OFFSET = {
    (PulseKind.NRTZ, LinearPhaseType.I): Fraction(1, 2),
    (PulseKind.NRTZ, LinearPhaseType.II): Fraction(0),
    (PulseKind.RTZ, LinearPhaseType.I): Fraction(1, 4),
    (PulseKind.RTZ, LinearPhaseType.II): Fraction(-1, 4),
    (PulseKind.RTC, LinearPhaseType.III): Fraction(1, 2),
    (PulseKind.RTC, LinearPhaseType.IV): Fraction(0),
    (PulseKind.RTCZ, LinearPhaseType.III): Fraction(1, 4),
    (PulseKind.RTCZ, LinearPhaseType.IV): Fraction(-1, 4),
}


@dataclass(frozen=True)
class Delay:
    """Delay of the equalized system, ``K = INT + offset`` samples."""

    integer: int
    offset: Fraction

    @property
    def K(self) -> float:
        return self.integer + float(self.offset)

    def __float__(self) -> float:
        return self.K


def delay_K(t: LinearPhaseType | str, order: int, kind: PulseKind | str) -> Delay:
    t = LinearPhaseType.parse(t)
    kind = PulseKind.parse(kind)
    if not compatible(kind, t):
        raise ValueError(f"pulse {kind} cannot be equalized by a Type {t} filter")
    check_parity(t, order)
    integer = order // 2 if t.even_order else (order + 1) // 2
    return Delay(integer, _DELAY_OFFSET[kind, t])


@dataclass(frozen=True)
class FirFilter:
    """Linear-phase FIR filter stored by its expansion coefficients.

    ``expansion`` holds a(0..M) for Type I (sum a(k) cos(k wT)), b(1..M) for
    Type II (cos((k-1/2) wT)), c(1..M) for Type III (sin(k wT)) and d(1..M) for
    Type IV (sin((k-1/2) wT)).
    """

    filter_type: LinearPhaseType
    order: int
    expansion: np.ndarray = field(repr=False)

    def __post_init__(self):
        check_parity(self.filter_type, self.order)
        exp = np.asarray(self.expansion, dtype=float)
        if exp.shape != (n_free(self.filter_type, self.order),):
            raise ValueError(
                f"Type {self.filter_type} order {self.order} needs "
                f"{n_free(self.filter_type, self.order)} expansion coefficients, got {exp.shape}"
            )
        object.__setattr__(self, "expansion", exp)

    @property
    def coefficients(self) -> np.ndarray:
        """Impulse response h(0..N)."""
        return expansion_to_impulse(self.filter_type, self.order, self.expansion)

    @classmethod
    def from_impulse(cls, t: LinearPhaseType | str, h, atol: float = 1e-12) -> "FirFilter":
        t = LinearPhaseType.parse(t)
        h = np.asarray(h, dtype=float)
        order = len(h) - 1
        sign = 1.0 if t.symmetric else -1.0
        if not np.allclose(h, sign * h[::-1], rtol=0.0, atol=atol * max(1.0, np.abs(h).max())):
            kind = "symmetric" if t.symmetric else "antisymmetric"
            raise ValueError(f"impulse response is not {kind} as Type {t} requires")
        return cls(t, order, impulse_to_expansion(t, h))


def expansion_to_impulse(t: LinearPhaseType, order: int, exp) -> np.ndarray:
    exp = np.asarray(exp, dtype=float)
    h = np.zeros(order + 1)
    if t is LinearPhaseType.I:
        mid = order // 2
        h[mid] = exp[0]
        for k in range(1, mid + 1):
            h[mid - k] = h[mid + k] = exp[k] / 2
    elif t is LinearPhaseType.II:
        m = (order + 1) // 2
        for k in range(1, m + 1):
            h[m - k] = h[m + k - 1] = exp[k - 1] / 2
    elif t is LinearPhaseType.III:
        mid = order // 2
        for k in range(1, mid + 1):
            h[mid - k] = exp[k - 1] / 2
            h[mid + k] = -exp[k - 1] / 2
    else:
        m = (order + 1) // 2
        for k in range(1, m + 1):
            h[m - k] = exp[k - 1] / 2
            h[m + k - 1] = -exp[k - 1] / 2
    return h


def impulse_to_expansion(t: LinearPhaseType, h) -> np.ndarray:
    h = np.asarray(h, dtype=float)
    order = len(h) - 1
    check_parity(t, order)
    if t is LinearPhaseType.I:
        mid = order // 2
        return np.concatenate([[h[mid]], 2 * h[mid - 1 :: -1] if mid else []])
    if t is LinearPhaseType.II:
        m = (order + 1) // 2
        return 2 * h[m - 1 :: -1]
    if t is LinearPhaseType.III:
        mid = order // 2
        return 2 * h[mid - 1 :: -1] if mid else np.zeros(0)
    m = (order + 1) // 2
    return 2 * h[m - 1 :: -1]


def expansion_basis(t: LinearPhaseType, order: int, wT) -> np.ndarray:
    """Trigonometric basis of the zero-phase response, shape (len(wT), n_free)."""
    w = np.atleast_1d(np.asarray(wT, dtype=float))
    m = n_free(t, order)
    if t is LinearPhaseType.I:
        k = np.arange(m)
        return np.cos(np.outer(w, k))
    k = np.arange(1, m + 1)
    if t is LinearPhaseType.II:
        return np.cos(np.outer(w, k - 0.5))
    if t is LinearPhaseType.III:
        return np.sin(np.outer(w, k))
    return np.sin(np.outer(w, k - 0.5))


def zero_phase_response(filt: FirFilter, wT):
    """H_R(wT) from the cosine/sine expansion; valid at unfolded frequencies."""
    w = np.asarray(wT, dtype=float)
    out = expansion_basis(filt.filter_type, filt.order, w) @ filt.expansion
    return float(out[0]) if w.ndim == 0 else out.reshape(w.shape)


def frequency_response(filt_or_h, wT):
    """Direct evaluation of sum h(n) exp(-j wT n)."""
    h = filt_or_h.coefficients if isinstance(filt_or_h, FirFilter) else np.asarray(filt_or_h, float)
    w = np.asarray(wT, dtype=float)
    n = np.arange(len(h))
    out = np.exp(-1j * np.outer(np.atleast_1d(w), n)) @ h
    return complex(out[0]) if w.ndim == 0 else out.reshape(w.shape)
