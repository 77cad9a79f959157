"""Minimax FIR equalizers for DAC reconstruction pulses and closed-form order estimates."""
from .pulses import PulseKind, pulse_amplitude, pulse_frequency_response, valid_nyquist_bands
from .fir_types import FirFilter, LinearPhaseType, delay_K, multiplier_count, structural_zeros
from .bands import BandSpec, make_grid
from .design import (
    ConvergenceError,
    DesignError,
    DesignProblem,
    DesignResult,
    design,
    design_lp,
    design_remez,
    verify_design,
)
from .search import EngineSettings, OrderCapExceeded, OrderSpec, SweepGrid, minimal_order, sweep
from .estimate import EstimateParams, builtin_params, estimate_order, evaluate_estimate
from .fitting import FitProblem, FitResult, fit, max_estimation_error

__version__ = "0.1.0"
