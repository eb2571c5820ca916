"""Aggregate and single-loss quantiles.

Aggregate loss: Poisson frequency with Gamma severities. Its VaR at ``kappa``
is approximated by the severity quantile at the shifted level
``u = 1 - (1 - kappa) / E[N]``.

Single loss: ``N`` obligors that all default, each with an exponential or
truncated-exponential severity. Heterogeneous rates collapse to their
infimum, which picks the heaviest tail and is therefore conservative. The sum
of ``N`` exponentials is Erlang(``N``, rate), i.e. Gamma with integer shape;
the truncated case reuses the Erlang CDF scaled by
``(1 - exp(-rate L))^-N``.
"""

import math
from dataclasses import dataclass

from scipy.optimize import brentq

from .quantile import GammaParams, gamma_quantile_approx, gamma_quantile_exact
from .special import DomainError, regularized_p

__all__ = [
    "PoissonFrequency",
    "Exponential",
    "TruncatedExponential",
    "GammaSeverity",
    "ConvolutionLoss",
    "TruncationError",
    "MIN_EXPOSURE_MULTIPLE",
    "shifted_confidence",
    "var_aggregate",
    "erlang_cdf",
    "erlang_quantile",
    "trunc_exp_mean",
    "trunc_exp_mean_direct",
    "solve_lambda_from_mean",
    "trunc_conv_cdf",
    "kappa_prime",
    "trunc_quantile",
]

# gross exposure must exceed this many exponential means (L * rate > 9) for
# the effective confidence to stay inside the correction model's u range
MIN_EXPOSURE_MULTIPLE = 9.0


class TruncationError(DomainError):
    """Gross exposure too small relative to the severity mean."""


@dataclass(frozen=True)
class PoissonFrequency:
    mean_events: float

    def __post_init__(self):
        if not self.mean_events > 0:
            raise DomainError(f"Poisson mean must be positive, got {self.mean_events}")


@dataclass(frozen=True)
class Exponential:
    rate: float

    def __post_init__(self):
        if not self.rate > 0:
            raise DomainError(f"rate must be positive, got {self.rate}")

    @property
    def mean(self):
        return 1.0 / self.rate


@dataclass(frozen=True)
class TruncatedExponential:
    """Exponential conditioned on ``(0, gross_exposure)``."""

    rate: float
    gross_exposure: float

    def __post_init__(self):
        if not (self.rate > 0 and self.gross_exposure > 0):
            raise DomainError(f"rate and gross exposure must be positive, got {self}")

    @property
    def exposure_multiple(self):
        """``C = L * rate``: gross exposure in units of the untruncated mean."""
        return self.gross_exposure * self.rate

    @property
    def mean(self):
        return trunc_exp_mean(self.rate, self.gross_exposure)


@dataclass(frozen=True)
class GammaSeverity:
    params: GammaParams

    @property
    def mean(self):
        return self.params.mean


@dataclass(frozen=True)
class ConvolutionLoss:
    """Sum of ``n_obligors`` i.i.d. exponential or truncated-exponential severities."""

    n_obligors: int
    severity: object

    def __post_init__(self):
        if int(self.n_obligors) != self.n_obligors or self.n_obligors < 1:
            raise DomainError(f"n_obligors must be a positive integer, got {self.n_obligors}")
        if not isinstance(self.severity, (Exponential, TruncatedExponential)):
            raise TypeError("convolution losses take Exponential or TruncatedExponential severities")

    @property
    def lambda_prime(self):
        return self.severity.rate

    @property
    def erlang(self):
        """Gamma parameters of the untruncated N-fold convolution."""
        return GammaParams(float(self.n_obligors), self.lambda_prime)

    @classmethod
    def from_rates(cls, rates, gross_exposure=None):
        """Collapse heterogeneous obligor rates to their infimum."""
        rates = list(rates)
        if not rates:
            raise DomainError("need at least one obligor rate")
        lam = min(rates)
        sev = Exponential(lam) if gross_exposure is None else TruncatedExponential(lam, gross_exposure)
        return cls(len(rates), sev)


def shifted_confidence(kappa, freq):
    """Severity confidence level ``1 - (1 - kappa) / E[N]``."""
    if not 0.0 < kappa < 1.0:
        raise DomainError(f"kappa must lie in (0, 1), got {kappa}")
    u = 1.0 - (1.0 - kappa) / freq.mean_events
    if u <= 0.0:
        raise DomainError(
            f"shifted confidence {u} <= 0: E[N]={freq.mean_events} is too small for kappa={kappa}"
        )
    return u


def var_aggregate(kappa, freq, severity, model=None, *, exact=False):
    """VaR of a compound Poisson-Gamma loss at ``kappa``.

    ``exact=True`` swaps the tangent-line quantile for the root-finding
    reference, isolating the approximation error from the frequency shift.
    """
    params = severity.params if isinstance(severity, GammaSeverity) else severity
    u = shifted_confidence(kappa, freq)
    if exact:
        return gamma_quantile_exact(u, params)
    return gamma_quantile_approx(u, params, model)


def _require_exponential(conv):
    if not isinstance(conv.severity, Exponential):
        raise TypeError("expected a convolution of untruncated exponentials")


def _require_truncated(conv):
    if not isinstance(conv.severity, TruncatedExponential):
        raise TypeError("expected a convolution of truncated exponentials")


def erlang_cdf(x, conv):
    """CDF of the Erlang sum: ``P(N, rate * x)``."""
    _require_exponential(conv)
    if x < 0:
        raise DomainError(f"loss must be >= 0, got {x}")
    return regularized_p(conv.n_obligors, conv.lambda_prime * x)


def erlang_quantile(kappa, conv, model=None, *, exact=False):
    _require_exponential(conv)
    if exact:
        return gamma_quantile_exact(kappa, conv.erlang)
    return gamma_quantile_approx(kappa, conv.erlang, model)


def trunc_exp_mean(rate, gross_exposure):
    """Mean of an exponential truncated to ``(0, L)``.

    ``1/rate - L / (exp(rate L) - 1)``; finite for any ``rate * L`` and
    equal to ``1/rate`` for ``L = inf``.
    """
    if not (rate > 0 and gross_exposure > 0):
        raise DomainError("rate and gross exposure must be positive")
    if math.isinf(gross_exposure):
        return 1.0 / rate
    return 1.0 / rate - gross_exposure / math.expm1(rate * gross_exposure)


def trunc_exp_mean_direct(rate, gross_exposure):
    """Same mean written as ``(1 - e^C + C) / (rate (1 - e^C))`` with ``C = rate L``.

    Overflows for ``C`` beyond ~709; kept as a cross-check of :func:`trunc_exp_mean`.
    """
    c = rate * gross_exposure
    e = math.exp(c)
    return (1.0 - e + c) / (rate * (1.0 - e))


def solve_lambda_from_mean(mu, gross_exposure):
    """Rate whose truncated-exponential mean on ``(0, L)`` equals ``mu``.

    The truncated mean falls strictly from ``L/2`` (rate -> 0) to 0, so a
    solution exists iff ``0 < mu < L/2``.
    """
    if math.isinf(gross_exposure):
        return 1.0 / mu
    if not 0.0 < mu < gross_exposure / 2.0:
        raise DomainError(
            f"mean {mu} infeasible for gross exposure {gross_exposure}: need 0 < mu < L/2"
        )
    hi = 1.0 / mu  # trunc mean < 1/rate, so mean(hi) < mu
    lo = 0.5 * hi
    while trunc_exp_mean(lo, gross_exposure) <= mu:
        lo *= 0.5
    return brentq(
        lambda lam: trunc_exp_mean(lam, gross_exposure) - mu,
        lo, hi, xtol=1e-300, rtol=1e-15, maxiter=500,
    )


def _log_truncation_mass(conv):
    # N log(1 - exp(-rate L))
    c = conv.severity.exposure_multiple
    return conv.n_obligors * math.log1p(-math.exp(-c))


def trunc_conv_cdf(x, conv):
    """Convolution CDF for truncated severities in the closed form
    ``P(N, rate x) / (1 - exp(-rate L))^N``.

    The form is exact only for ``x <= L``; it tends to
    ``(1 - exp(-rate L))^-N > 1`` as ``x`` grows.
    """
    _require_truncated(conv)
    if x < 0:
        raise DomainError(f"loss must be >= 0, got {x}")
    return regularized_p(conv.n_obligors, conv.lambda_prime * x) * math.exp(
        -_log_truncation_mass(conv)
    )


def kappa_prime(kappa, conv):
    """Effective confidence ``(1 - exp(-rate L))^N * kappa``."""
    _require_truncated(conv)
    if not 0.0 < kappa < 1.0:
        raise DomainError(f"kappa must lie in (0, 1), got {kappa}")
    if math.isinf(conv.severity.gross_exposure):
        return kappa
    return kappa * math.exp(_log_truncation_mass(conv))


def trunc_quantile(kappa, conv, model=None, *, exact=False):
    """Single-loss quantile for truncated severities, evaluated at ``kappa'``.

    Raises :class:`TruncationError` unless ``C = L * rate > 9``.
    """
    _require_truncated(conv)
    c = conv.severity.exposure_multiple
    if not c > MIN_EXPOSURE_MULTIPLE:
        raise TruncationError(
            f"gross exposure is {c:.4g} severity means; the truncated quantile needs "
            f"C = L * rate > {MIN_EXPOSURE_MULTIPLE:g}"
        )
    kp = kappa_prime(kappa, conv)
    if exact:
        return gamma_quantile_exact(kp, conv.erlang)
    return gamma_quantile_approx(kp, conv.erlang, model)
