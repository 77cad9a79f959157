"""DAC reconstruction pulses and their normalized frequency responses.

All responses are normalized by the sampling period T and expressed as
functions of the digital frequency ``wT`` (rad).
"""
from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

# below this |argument| the removable singularities use their series expansions
_SERIES_CUTOFF = 1e-8


class PulseKind(enum.Enum):
    NRTZ = "nrtz"
    RTZ = "rtz"
    RTC = "rtc"
    RTCZ = "rtcz"

    @classmethod
    def parse(cls, value: "str | PulseKind") -> "PulseKind":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).strip().lower())
        except ValueError:
            names = ", ".join(k.value for k in cls)
            raise ValueError(f"unknown pulse {value!r}; expected one of {names}") from None

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class PulseTraits:
    amplitude_scale: float
    delay_fraction: float
    has_j_factor: bool
    valid_bands: frozenset[int]


TRAITS: dict[PulseKind, PulseTraits] = {
    PulseKind.NRTZ: PulseTraits(1.0, 0.5, False, frozenset({1})),
    PulseKind.RTZ: PulseTraits(0.5, 0.25, False, frozenset({1, 2, 3})),
    PulseKind.RTC: PulseTraits(1.0, 0.5, True, frozenset({2, 3})),
    PulseKind.RTCZ: PulseTraits(0.5, 0.25, True, frozenset({2, 3, 4, 5, 6})),
}


def traits(kind: PulseKind | str) -> PulseTraits:
    return TRAITS[PulseKind.parse(kind)]


def valid_nyquist_bands(kind: PulseKind | str) -> set[int]:
    """Nyquist bands in which ``kind`` is used for equalization."""
    return set(traits(kind).valid_bands)


def _sinc_half(x: np.ndarray) -> np.ndarray:
    # sin(x)/x
    small = np.abs(x) < _SERIES_CUTOFF
    safe = np.where(small, 1.0, x)
    return np.where(small, 1.0 - x * x / 6.0, np.sin(safe) / safe)


def _versine_ratio(x: np.ndarray) -> np.ndarray:
    # (1 - cos x)/x, written as 2 sin^2(x/2)/x to avoid cancellation
    small = np.abs(x) < _SERIES_CUTOFF
    safe = np.where(small, 1.0, x)
    s = np.sin(0.5 * safe)
    return np.where(small, 0.5 * x, 2.0 * s * s / safe)


def pulse_amplitude(kind: PulseKind | str, wT):
    """Real amplitude A(wT) of the pulse with delay, j factor and T removed.

    Returns a float for scalar input and an ndarray otherwise.
    """
    kind = PulseKind.parse(kind)
    w = np.asarray(wT, dtype=float)
    tr = TRAITS[kind]
    x = w * tr.delay_fraction
    if tr.has_j_factor:
        a = tr.amplitude_scale * _versine_ratio(x)
    else:
        a = tr.amplitude_scale * _sinc_half(x)
    return float(a) if a.ndim == 0 else a


def pulse_frequency_response(kind: PulseKind | str, wT):
    """Normalized pulse response P(jw)/T, including the delay term and j factor."""
    kind = PulseKind.parse(kind)
    tr = TRAITS[kind]
    w = np.asarray(wT, dtype=float)
    resp = np.asarray(pulse_amplitude(kind, w)) * np.exp(-1j * w * tr.delay_fraction)
    if tr.has_j_factor:
        resp = 1j * resp
    return complex(resp) if resp.ndim == 0 else resp


def pulse_waveform(kind: PulseKind | str, t):
    """Time-domain pulse shape p(t) for t in units of T (unit height)."""
    kind = PulseKind.parse(kind)
    t = np.asarray(t, dtype=float)
    out = np.zeros_like(t)
    if kind is PulseKind.NRTZ:
        out[(t >= 0) & (t < 1)] = 1.0
    elif kind is PulseKind.RTZ:
        out[(t >= 0) & (t < 0.5)] = 1.0
    elif kind is PulseKind.RTC:
        out[(t >= 0) & (t < 0.5)] = 1.0
        out[(t >= 0.5) & (t < 1)] = -1.0
    else:
        out[(t >= 0) & (t < 0.25)] = 1.0
        out[(t >= 0.25) & (t < 0.5)] = -1.0
    return out
