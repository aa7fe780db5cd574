"""Rational spectral estimates from covariance lags, with error bounds.

The univariate API works on the uniform grid ``theta_j = -pi + 2 pi j / M``
with lags ``r_k = (1/2pi) integral cos(k theta) Phi``; the product-grid
counterparts live in :mod:`specbound.multivariate`.
"""
__version__ = "0.1.0"

from ._newton import NewtonResult, SolverOptions
from .bounds import (
    BoundReport,
    Term,
    finite_sample_tv_upper_bound,
    kl_lower_bound,
    log_inequality_holds,
    noise_tv_upper_bound,
    tv_from_kl,
)
from .errors import *  # noqa: F401,F403
from .errors import __all__ as _error_names
from .estimator import (
    EstimatorProblem,
    RationalDensity,
    dual_hessian,
    dual_value_and_gradient,
    solve_dual,
)
from .maxent import (
    BoxSolution,
    LagBox,
    MaxEntDensity,
    maxent_dual_value_and_gradient,
    maxent_entropy_identity_check,
    solve_maxent,
    solve_maxent_box,
)
from .sampling import (
    GaussianProduct,
    LagProbability,
    ProbabilityAssessment,
    ProcessModel,
    SampleSeries,
    add_noise,
    assess_box,
    estimate_lags,
    gaussian_product_moments,
    marginal_interval_probability,
    moment_interval_probability,
    monte_carlo_interval_probability,
    simulate,
    wilson_interval,
)
from .trig import (
    AngularGrid,
    CovarianceSequence,
    GridDensity,
    TrigPolynomial,
    cepstral_coeffs,
    compute_lags,
    cosine_matrix,
    entropy,
    evaluate,
    kl_divergence,
    pairing_weights,
    toeplitz_positive_definite,
    tv_distance,
)
from .validation import run_scenario

__all__ = [
    "__version__",
    "SolverOptions",
    "NewtonResult",
    "AngularGrid",
    "CovarianceSequence",
    "GridDensity",
    "TrigPolynomial",
    "cepstral_coeffs",
    "compute_lags",
    "cosine_matrix",
    "entropy",
    "evaluate",
    "kl_divergence",
    "pairing_weights",
    "toeplitz_positive_definite",
    "tv_distance",
    "EstimatorProblem",
    "RationalDensity",
    "solve_dual",
    "dual_value_and_gradient",
    "dual_hessian",
    "MaxEntDensity",
    "LagBox",
    "BoxSolution",
    "solve_maxent",
    "solve_maxent_box",
    "maxent_dual_value_and_gradient",
    "maxent_entropy_identity_check",
    "BoundReport",
    "Term",
    "tv_from_kl",
    "noise_tv_upper_bound",
    "finite_sample_tv_upper_bound",
    "kl_lower_bound",
    "log_inequality_holds",
    "ProcessModel",
    "SampleSeries",
    "GaussianProduct",
    "LagProbability",
    "ProbabilityAssessment",
    "simulate",
    "add_noise",
    "estimate_lags",
    "gaussian_product_moments",
    "marginal_interval_probability",
    "moment_interval_probability",
    "assess_box",
    "monte_carlo_interval_probability",
    "wilson_interval",
    "run_scenario",
    *_error_names,
]
