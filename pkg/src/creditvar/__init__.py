"""Credit-portfolio VaR from aggregate and single-loss models.

A tangent-line closed form for high Gamma quantiles, its recalibration, the
compound Poisson-Gamma and Erlang/truncated-exponential loss models built on
it, and a seeded Monte Carlo oracle to check them.
"""

from .calibration import CalibrationGrid, calibrate, fit_log_model, fit_polynomials, optimal_p
from .comparison import SweepSpec, alpha_prime, compare_exponential, compare_truncated, kappa_prime_curve
from .loss_models import (
    ConvolutionLoss,
    Exponential,
    GammaSeverity,
    PoissonFrequency,
    TruncatedExponential,
    TruncationError,
    erlang_cdf,
    erlang_quantile,
    kappa_prime,
    shifted_confidence,
    solve_lambda_from_mean,
    trunc_conv_cdf,
    trunc_exp_mean,
    trunc_quantile,
    var_aggregate,
)
from .montecarlo import QuantileEstimate, SimulationSpec, empirical_quantile, simulate_losses
from .quantile import (
    PUBLISHED_MODEL,
    CorrectionModel,
    GammaParams,
    OutOfRangeWarning,
    correction_factor,
    default_model,
    evaluation_point,
    gamma_quantile_approx,
    gamma_quantile_exact,
    relative_error,
    tail_linearization,
)
from .special import (
    ConvergenceError,
    DomainError,
    inverse_regularized_p,
    ln_gamma,
    lower_incomplete_gamma,
    regularized_p,
)

__version__ = "0.1.0"
