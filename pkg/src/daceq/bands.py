"""Design bands inside a Nyquist band and uniform frequency grids over them."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

DEFAULT_DENSITY = 16
MIN_GRID_POINTS = 256


@dataclass(frozen=True)
class BandSpec:
    nb: int
    B: float

    def __post_init__(self):
        if int(self.nb) != self.nb or self.nb < 1:
            raise ValueError(f"Nyquist band must be a positive integer, got {self.nb}")
        if not (0.0 < self.B < np.pi):
            raise ValueError(f"bandwidth must satisfy 0 < B < pi, got B = {self.B / np.pi:.6g}*pi")

    @classmethod
    def from_fraction(cls, nb: int, b_over_pi: float) -> "BandSpec":
        return cls(int(nb), float(b_over_pi) * np.pi)


def band_interval(spec: BandSpec) -> tuple[float, float]:
    """Band edges in rad: [0, B] for NB = 1, otherwise centred in the Nyquist band."""
    if spec.nb == 1:
        return 0.0, spec.B
    centre = (spec.nb - 0.5) * np.pi
    return centre - spec.B / 2, centre + spec.B / 2


@dataclass(frozen=True)
class FrequencyGrid:
    points: np.ndarray
    density: int

    def __len__(self) -> int:
        return len(self.points)

    @property
    def lo(self) -> float:
        return float(self.points[0])

    @property
    def hi(self) -> float:
        return float(self.points[-1])


def make_grid(spec: BandSpec, n_free_params: int, density: int = DEFAULT_DENSITY) -> FrequencyGrid:
    if n_free_params < 1:
        raise ValueError("grid needs at least one free parameter")
    if density < 8:
        raise ValueError(f"grid density must be >= 8 points per coefficient, got {density}")
    lo, hi = band_interval(spec)
    if not hi > lo:
        raise ValueError("degenerate design band")
    n = max(density * n_free_params, MIN_GRID_POINTS)
    pts = np.linspace(lo, hi, n)
    pts[0], pts[-1] = lo, hi
    return FrequencyGrid(pts, density)
