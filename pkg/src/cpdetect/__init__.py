"""Bayesian last-changepoint probabilities with a GLR baseline and benchmark."""

from .gaussian_stats import (
    EstimationMode,
    GaussianParams,
    GaussianSegmentStats,
    PosteriorDraw,
    PrefixStats,
)
from .glr import GlrConfig, GlrState, glr_decision
from .harness import (
    DetectorKind,
    DetectorParams,
    ScenarioSpec,
    SweepResult,
    TrialRecord,
    interpolate_at_alpha,
    sigma_sweep,
    threshold_sweep,
    trimmed_mean_delay,
)
from .kernel import CppConfig, CppState, PosteriorMatrix, jacobi_step
from .single_change import (
    ProbabilityVector,
    SingleCpModel,
    posterior_exactly_one,
    posterior_zero_or_one,
)
from .variance_change import posterior_exactly_one_var

__all__ = [
    "CppConfig",
    "CppState",
    "DetectorKind",
    "DetectorParams",
    "EstimationMode",
    "GaussianParams",
    "GaussianSegmentStats",
    "GlrConfig",
    "GlrState",
    "PosteriorDraw",
    "PosteriorMatrix",
    "PrefixStats",
    "ProbabilityVector",
    "ScenarioSpec",
    "SingleCpModel",
    "SweepResult",
    "TrialRecord",
    "glr_decision",
    "interpolate_at_alpha",
    "jacobi_step",
    "posterior_exactly_one",
    "posterior_exactly_one_var",
    "posterior_zero_or_one",
    "sigma_sweep",
    "threshold_sweep",
    "trimmed_mean_delay",
]

__version__ = "0.1.0"
