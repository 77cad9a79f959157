"""Closed-form filter-order estimates and the built-in parameter table."""
from __future__ import annotations

from dataclasses import asdict, dataclass, field
from typing import Any

import numpy as np

from .fir_types import LinearPhaseType, check_parity
from .pulses import PulseKind

PARAM_NAMES = ("a1", "a2", "a3", "a4", "b1", "b2", "b3", "b4", "c")

# x**p for x < 0 and non-integer p; see power()
POWER_CONVENTIONS = ("signed", "abs")
DEFAULT_POWER = "signed"


@dataclass(frozen=True)
class EstimateParams:
    a1: float
    a2: float
    a3: float
    a4: float
    b1: float
    b2: float
    b3: float
    b4: float
    c: float
    provenance: dict[str, Any] = field(default_factory=dict, compare=False)

    def as_array(self) -> np.ndarray:
        return np.array([getattr(self, n) for n in PARAM_NAMES])

    @classmethod
    def from_array(cls, values, provenance: dict | None = None) -> "EstimateParams":
        return cls(*map(float, values), provenance=dict(provenance or {}))

    def to_dict(self) -> dict:
        d = asdict(self)
        d["provenance"] = dict(self.provenance)
        return d

    def satisfies_constraints(self) -> bool:
        return self.a2 > 0 and self.b2 > 0 and self.a4 <= self.b4


# (pulse, NB, type): a1, a2, a3, a4, b1, b2, b3, b4, c, eps_max
_TABLE = {
    (PulseKind.NRTZ, 1, LinearPhaseType.I): (-1.8860, 1.6994, 1.3380, 1.2150, 1.1523, 3.1189, 0.8861, 1.5646, 1.6565, 2.07),
    (PulseKind.NRTZ, 1, LinearPhaseType.II): (-2.5636, 0.0419, 1.1841, 1.0280, 1.3290, 5.3295, -0.0435, 1.5107, -2.1359, 2.15),
    (PulseKind.RTC, 2, LinearPhaseType.III): (-6.5450, 0.2535, 1.1020, 1.0592, 0.7124, 0.0144, 0.5291, 1.6930, -3.3270, 4.26),
    (PulseKind.RTC, 2, LinearPhaseType.IV): (-6.1858, 0.1881, 1.1211, 1.0690, 0.6163, 0.0004, 0.6623, 1.6317, -3.7629, 3.42),
    (PulseKind.RTC, 3, LinearPhaseType.III): (-7.3009, 0.3264, 1.0470, 1.0729, 0.6768, 0.0041, 0.5926, 1.6951, -2.2454, 4.08),
    (PulseKind.RTC, 3, LinearPhaseType.IV): (-7.1187, 0.4480, 1.0525, 1.0798, 0.4598, 0.0088, 0.6708, 1.7778, -3.7050, 3.48),
    (PulseKind.RTZ, 1, LinearPhaseType.I): (-0.6989, 0.6444, 1.7687, 0.9841, 0.7326, 8.3996, 0.5998, 1.5167, -0.8796, 1.86),
    (PulseKind.RTZ, 1, LinearPhaseType.II): (-3.9194, 0.3509, 1.0213, 1.0540, 0.8643, 2.1014, 0.2251, 1.6100, -1.7900, 2.10),
    (PulseKind.RTZ, 2, LinearPhaseType.I): (-1.1636, 0.8492, 1.8549, 0.9878, 0.7606, 7.2968, 0.6346, 1.6906, -0.8305, 3.06),
    (PulseKind.RTZ, 2, LinearPhaseType.II): (-6.9405, 0.3777, 1.0652, 1.0618, 0.9325, 1.0444, 0.2408, 1.7705, -3.8064, 3.39),
    (PulseKind.RTZ, 3, LinearPhaseType.I): (-1.7681, 0.6155, 1.6327, 1.0472, 1.1094, 4.3515, 0.6212, 1.6716, -0.4518, 3.32),
    (PulseKind.RTZ, 3, LinearPhaseType.II): (-6.9420, 0.2634, 1.0710, 1.0583, 0.6337, 0.0005, 0.5543, 1.6732, -3.5774, 3.44),
    (PulseKind.RTCZ, 2, LinearPhaseType.III): (-6.3698, 0.2626, 1.1139, 1.0794, 0.8666, 0.1547, 0.5521, 1.7007, -2.5299, 4.13),
    (PulseKind.RTCZ, 2, LinearPhaseType.IV): (-7.1531, 0.3382, 1.0594, 1.0830, 1.1192, 0.1113, 0.5253, 1.6354, -3.7004, 3.32),
    (PulseKind.RTCZ, 3, LinearPhaseType.III): (-7.2104, 0.2296, 1.0769, 1.0881, 1.0376, 0.0064, 0.7990, 1.5220, -3.1565, 4.08),
    (PulseKind.RTCZ, 3, LinearPhaseType.IV): (-7.0696, 0.3242, 1.0603, 1.0572, 0.8060, 0.0103, 0.4343, 1.6757, -3.7246, 3.33),
    (PulseKind.RTCZ, 4, LinearPhaseType.III): (-6.8575, 0.3248, 1.0796, 1.0511, 0.8774, 0.2604, 0.3911, 1.6827, -3.2172, 4.21),
    (PulseKind.RTCZ, 4, LinearPhaseType.IV): (-5.9339, 0.1883, 1.1421, 1.0649, 0.2773, 4.35e-6, 0.9005, 1.6442, -3.7037, 3.29),
    (PulseKind.RTCZ, 5, LinearPhaseType.III): (-8.2560, 0.4653, 0.9947, 1.0665, 1.7552, 1.9704, 0.2600, 1.5930, -2.8293, 4.14),
    (PulseKind.RTCZ, 5, LinearPhaseType.IV): (-4.0270, 0.0326, 1.2657, 1.0245, 2.4171, 0.8344, -0.2982, 1.5100, -4.5747, 3.34),
    (PulseKind.RTCZ, 6, LinearPhaseType.III): (-5.6443, 0.1462, 1.1504, 1.0669, 0.8911, 0.0042, 0.3929, 1.6808, -2.5730, 4.13),
    (PulseKind.RTCZ, 6, LinearPhaseType.IV): (-3.8103, 0.0329, 1.3015, 1.0127, 1.7109, 0.4613, -0.4411, 1.6626, -4.2685, 3.41),
}


def table_rows() -> list[tuple[PulseKind, int, LinearPhaseType]]:
    """All (pulse, NB, type) cases with built-in parameters, in table order."""
    return list(_TABLE)


def builtin_params(kind, nb: int, t) -> tuple[EstimateParams, float]:
    """Published parameters and maximal estimation error for one equalizer case."""
    key = (PulseKind.parse(kind), int(nb), LinearPhaseType.parse(t))
    try:
        row = _TABLE[key]
    except KeyError:
        raise KeyError(f"no built-in estimate for {key[0]} / NB {key[1]} / Type {key[2]}") from None
    prov = {"source": "builtin", "pulse": key[0].name, "nb": key[1], "filter_type": key[2].name}
    return EstimateParams(*row[:9], provenance=prov), row[9]


def _check_domain(B, delta):
    B = np.asarray(B, dtype=float)
    delta = np.asarray(delta, dtype=float)
    if np.any((B <= 0) | (B >= np.pi)):
        raise ValueError("bandwidth must satisfy 0 < B < pi")
    if np.any((delta <= 0) | (delta >= 1)):
        raise ValueError("accuracy must satisfy 0 < delta < 1")
    return B, delta


def power(x, p, convention: str = DEFAULT_POWER):
    """Real extension of x**p for possibly negative x.

    ``signed``: sign(x) |x|**p.  ``abs``: |x|**p.
    """
    x = np.asarray(x, dtype=float)
    if convention == "signed":
        return np.sign(x) * np.abs(x) ** p
    if convention == "abs":
        return np.abs(x) ** p
    raise ValueError(f"unknown power convention {convention!r}")


def basic_estimate(a: float, b: float, c: float, B, delta):
    """Three-term estimate c + a L/(pi-B) + b L^2/(pi-B)^2 with L = log10(delta)."""
    B, delta = _check_domain(B, delta)
    L = np.log10(delta)
    g = np.pi - B
    out = c + a * L / g + b * L**2 / g**2
    return float(out) if out.ndim == 0 else out


def evaluate_estimate(p: EstimateParams, B, delta, convention: str = DEFAULT_POWER):
    B, delta = _check_domain(B, delta)
    g = np.pi - B
    with np.errstate(divide="ignore", invalid="ignore"):
        ta = p.a1 * power(np.log10(p.a2 * delta), p.a3, convention) / g**p.a4
        tb = p.b1 * power(np.log10(p.b2 * delta), p.b3, convention) / g**p.b4
    out = p.c + ta + tb
    return float(out) if np.ndim(out) == 0 else out


def round_to_order(value: float, t) -> int:
    """Nearest integer, bumped up to the type's parity and floored at its smallest order."""
    t = LinearPhaseType.parse(t)
    n = int(np.floor(value + 0.5))
    if (n % 2 == 0) != t.even_order:
        n += 1
    n = max(n, t.min_order)
    check_parity(t, n)
    return n


def estimate_order(kind, nb: int, t, B: float, delta: float, convention: str = DEFAULT_POWER) -> int:
    params, _ = builtin_params(kind, nb, t)
    return round_to_order(evaluate_estimate(params, B, delta, convention), t)
