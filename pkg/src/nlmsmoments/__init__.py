"""
nlmsmoments
===========

Closed-form mean-square analysis of the NLMS adaptive filter driven by
colored circular complex Gaussian input, together with a Monte-Carlo NLMS
simulator and a brute-force moment oracle for validating every prediction.

Typical use::

    from nlmsmoments import FilterScenario, toeplitz_covariance, learning_curve

    sc = FilterScenario([0.227, 0.46, 0.688, 0.46, 0.227], mu=0.1,
                        noise_var=0.01, input_cov=toeplitz_covariance(5, 0.5))
    curve = learning_curve(sc, 2000, "mse")
"""
__version__ = "0.1.0"

from .errors import (
    ConditioningError,
    DimensionError,
    InstabilityError,
    NLMSMomentsError,
    PoleError,
    SimulationError,
    ValidationError,
)
from .spectrum import SigmaKKbar, Spectrum
from .eigmoments import MomentSet, derived_moments
from .momentmat import (
    InputCovariance,
    MomentMatrices,
    Whitening,
    build_F,
    toeplitz_covariance,
    whiten,
)
from .predictor import (
    FilterScenario,
    LearningCurve,
    StabilityReport,
    learning_curve,
    stability,
    steady_state,
    tracking_emse,
)
from .simulator import MonteCarloResult, RngSeedPolicy, monte_carlo, nlms_run
from .mc_oracle import MomentEstimate, empirical_cdf, estimate_moment_set
from .config import ExperimentConfig, load_config

__all__ = [
    "__version__",
    "NLMSMomentsError",
    "ValidationError",
    "DimensionError",
    "ConditioningError",
    "PoleError",
    "InstabilityError",
    "SimulationError",
    "Spectrum",
    "SigmaKKbar",
    "MomentSet",
    "derived_moments",
    "InputCovariance",
    "Whitening",
    "MomentMatrices",
    "toeplitz_covariance",
    "whiten",
    "build_F",
    "FilterScenario",
    "LearningCurve",
    "StabilityReport",
    "learning_curve",
    "steady_state",
    "tracking_emse",
    "stability",
    "RngSeedPolicy",
    "MonteCarloResult",
    "nlms_run",
    "monte_carlo",
    "MomentEstimate",
    "estimate_moment_set",
    "empirical_cdf",
    "ExperimentConfig",
    "load_config",
]
