"""Decoherence suppression by synchronized pi-pulse trains in a spin-boson model.

Times are scaled by the reservoir centre frequency ``omega_p``; the
baseline reservoir is ``gamma_p = 0.15``, ``s = 3``.
"""
from .errors import (
    ConvergenceError,
    DomainError,
    EnvelopeError,
    FlatBracketError,
    PreconditionError,
    SyncPulseError,
    UnsupportedMethodError,
)
from .spectral import Family, SpectralDensity, cosine_kernel, support_bounds, total_weight
from .sequence import PulseTrain, displacement_amplitudes, modulation_delta, pair_expansion
from .coherence import CoherenceTrace, QuadratureConfig, decoherence_exponent, intensity, trace
from .analysis import (
    InteractionModeReport,
    PeakSeries,
    SweepResult,
    asymptotic_peak,
    interaction_mode_report,
    optimize_interval,
    sweep,
)
from .oracle import DiscreteModeSet, cross_check, discretize
from .kernels import BACKEND

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "CoherenceTrace",
    "ConvergenceError",
    "DiscreteModeSet",
    "DomainError",
    "EnvelopeError",
    "Family",
    "FlatBracketError",
    "InteractionModeReport",
    "PeakSeries",
    "PreconditionError",
    "PulseTrain",
    "QuadratureConfig",
    "SpectralDensity",
    "SweepResult",
    "SyncPulseError",
    "UnsupportedMethodError",
    "asymptotic_peak",
    "cosine_kernel",
    "cross_check",
    "decoherence_exponent",
    "discretize",
    "displacement_amplitudes",
    "intensity",
    "interaction_mode_report",
    "modulation_delta",
    "optimize_interval",
    "pair_expansion",
    "support_bounds",
    "sweep",
    "total_weight",
    "trace",
]
