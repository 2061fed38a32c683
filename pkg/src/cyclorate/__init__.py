"""Sinusoidal arrival-rate estimation for nonhomogeneous Poisson processes.

Event timestamps go in; a fitted cyclic intensity (DC level plus cosine
components) comes out, via windowed point-process periodograms with either
data-driven thresholding or BIC model selection, followed by a complex
least-squares amplitude/phase fit.
"""

from .coefficients import (
    CoefficientFit,
    SingularGramError,
    asymptotic_frequency_covariance,
    fit_coefficients,
    rate_mse,
    reconstruct_rate,
)
from .estimator import CyclicRateEstimator
from .periodogram import SpectrumGrid, evaluate_periodogram, find_peaks, sup_magnitude
from .rates import RateModel, SawtoothRate, SeparationReport, preset
from .recovery import (
    CapExceededError,
    FrequencySet,
    NoiseEstimate,
    RecoveryConfig,
    a2_margin,
    estimate_noise,
    max_dynamic_range,
    modified_threshold,
    run_bic_recovery,
    run_threshold_recovery,
    theoretical_threshold,
)
from .simulate import EventSeries, RngStream, simulate_homogeneous, simulate_nhpp
from .windows import TailSums, WindowSpec, leakage_bound, tail_sums, window_transform, window_value

__version__ = "0.1.0"

__all__ = [
    "CapExceededError",
    "CoefficientFit",
    "CyclicRateEstimator",
    "EventSeries",
    "FrequencySet",
    "NoiseEstimate",
    "RateModel",
    "RecoveryConfig",
    "RngStream",
    "SawtoothRate",
    "SeparationReport",
    "SingularGramError",
    "SpectrumGrid",
    "TailSums",
    "WindowSpec",
    "a2_margin",
    "asymptotic_frequency_covariance",
    "estimate_noise",
    "evaluate_periodogram",
    "find_peaks",
    "fit_coefficients",
    "leakage_bound",
    "max_dynamic_range",
    "modified_threshold",
    "preset",
    "rate_mse",
    "reconstruct_rate",
    "run_bic_recovery",
    "run_threshold_recovery",
    "simulate_homogeneous",
    "simulate_nhpp",
    "sup_magnitude",
    "tail_sums",
    "theoretical_threshold",
    "window_transform",
    "window_value",
]
