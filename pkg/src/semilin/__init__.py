"""Weighted estimators for semi-linear autoregression ``xi_k = a f(xi_{k-1}) + eps_k``."""

__version__ = "0.1.0"

from .continuous import (ContinuousModelSpec, ContinuousPath, Intensity, check_stationarity_continuous,
                         estimate_continuous, functional_V_T, simulate_continuous)
from .errors import (ContractionError, DegenerateDenominatorError, DomainError, PreconditionError,
                     SemilinError, ValidationError)
from .estimators import (LSE, OPTIMAL, EstimateResult, WeightScheme, check_stationarity_system,
                         estimate_discrete, functional_V_n, limit_variance_optimal, weights_for)
from .experiments import ExperimentConfig, McSummary, compare_schemes, convergence_diagnostics, run_monte_carlo
from .functions import FunctionSpec, certify_lipschitz, eval_f
from .model import DiscretePath, ModelSpec, UniformInit, compose_f_r, simulate_batch, simulate_discrete
from .noise import GammaDist, NoiseSpec, conditional_variance

__all__ = [
    "ContinuousModelSpec", "ContinuousPath", "Intensity", "check_stationarity_continuous",
    "estimate_continuous", "functional_V_T", "simulate_continuous",
    "ContractionError", "DegenerateDenominatorError", "DomainError", "PreconditionError",
    "SemilinError", "ValidationError",
    "LSE", "OPTIMAL", "EstimateResult", "WeightScheme", "check_stationarity_system",
    "estimate_discrete", "functional_V_n", "limit_variance_optimal", "weights_for",
    "ExperimentConfig", "McSummary", "compare_schemes", "convergence_diagnostics", "run_monte_carlo",
    "FunctionSpec", "certify_lipschitz", "eval_f",
    "DiscretePath", "ModelSpec", "UniformInit", "compose_f_r", "simulate_batch", "simulate_discrete",
    "GammaDist", "NoiseSpec", "conditional_variance",
]
