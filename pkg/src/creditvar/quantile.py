"""Closed-form Gamma quantile at high confidence levels.

The upper tail of the Gamma CDF is replaced by its tangent line at an
evaluation point ``x_bar`` to the right of the mean, and the line is inverted.
Where the tangent touches is controlled by a correction factor
``p(u, alpha) = a(u) * log(b(u) * alpha)`` with polynomial ``a`` and ``b``.
"""

import json
import math
import warnings
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources
from pathlib import Path

import numpy as np
from numpy.polynomial import polynomial as P

from .special import DomainError, gamma_log_pdf, inverse_regularized_p, ln_gamma, regularized_p

__all__ = [
    "GammaParams",
    "CorrectionModel",
    "TailLinearization",
    "OutOfRangeWarning",
    "PUBLISHED_MODEL",
    "default_model",
    "correction_factor",
    "shift_factor",
    "evaluation_point",
    "tail_linearization",
    "gamma_quantile_approx",
    "gamma_quantile_exact",
    "relative_error",
]


class OutOfRangeWarning(UserWarning):
    """Inputs lie outside the range the correction model was fitted on."""


@dataclass(frozen=True)
class GammaParams:
    """Shape/rate parameterisation of a Gamma distribution."""

    alpha: float
    beta: float

    def __post_init__(self):
        if not (self.alpha > 0 and self.beta > 0):
            raise DomainError(f"Gamma parameters must be positive, got {self}")

    @property
    def mean(self):
        return self.alpha / self.beta

    def cdf(self, x):
        return regularized_p(self.alpha, self.beta * x)


@dataclass(frozen=True)
class CorrectionModel:
    """Polynomial correction factor ``p(u, alpha) = a(u) log(b(u) alpha)``.

    ``c`` holds the 7 monomial coefficients of ``a(u)`` and ``d`` the 8 of
    ``b(u)``, lowest order first.
    """

    c: tuple
    d: tuple
    alpha_range: tuple = (1.0, 100.0)
    u_range: tuple = (0.9, 0.999)
    name: str = field(default="custom", compare=False)

    def __post_init__(self):
        object.__setattr__(self, "c", tuple(float(v) for v in self.c))
        object.__setattr__(self, "d", tuple(float(v) for v in self.d))
        object.__setattr__(self, "alpha_range", tuple(float(v) for v in self.alpha_range))
        object.__setattr__(self, "u_range", tuple(float(v) for v in self.u_range))
        if len(self.c) != 7 or len(self.d) != 8:
            raise ValueError(
                f"need 7 coefficients for a(u) and 8 for b(u), got {len(self.c)} and {len(self.d)}"
            )
        for lo, hi in (self.alpha_range, self.u_range):
            if not lo <= hi:
                raise ValueError("validity ranges must be ordered intervals")

    def a(self, u):
        return P.polyval(u, self.c)

    def b(self, u):
        return P.polyval(u, self.d)

    def p(self, u, alpha):
        """Correction factor without range checking."""
        return self.a(u) * np.log(self.b(u) * alpha)

    def in_range(self, u, alpha):
        (alo, ahi), (ulo, uhi) = self.alpha_range, self.u_range
        return bool(np.all((ulo <= u) & (u <= uhi) & (alo <= alpha) & (alpha <= ahi)))

    def to_dict(self):
        return {
            "c": list(self.c),
            "d": list(self.d),
            "alpha_range": list(self.alpha_range),
            "u_range": list(self.u_range),
        }

    @classmethod
    def from_dict(cls, data, name="custom"):
        unknown = set(data) - {"c", "d", "alpha_range", "u_range"}
        if unknown:
            raise ValueError(f"unknown correction-model keys: {sorted(unknown)}")
        return cls(
            c=data["c"],
            d=data["d"],
            alpha_range=data.get("alpha_range", (1.0, 100.0)),
            u_range=data.get("u_range", (0.9, 0.999)),
            name=name,
        )

    def save(self, path):
        Path(path).write_text(json.dumps(self.to_dict(), indent=2) + "\n")

    @classmethod
    def load(cls, path):
        path = Path(path)
        return cls.from_dict(json.loads(path.read_text()), name=path.stem)


# Coefficients as printed (3 significant figures). The rounding destroys the
# cancellation between terms: a(0.95) evaluates to ~4.9e4 instead of ~0.08.
# Kept for reference only; see default_model().
PUBLISHED_MODEL = CorrectionModel(
    c=(-4.83e5, 3.08e6, -8.16e6, 1.16e7, -9.19e6, 3.90e6, -6.90e5),
    d=(4.35e9, -3.23e10, 1.02e11, -1.80e11, 1.91e11, -1.21e11, 4.26e10, -6.44e9),
    name="published",
)


@lru_cache(maxsize=None)
def default_model():
    """Full-precision model produced by :func:`creditvar.calibration.calibrate`
    on its default grid and frozen into the package data."""
    text = resources.files("creditvar").joinpath("data/default_model.json").read_text()
    return CorrectionModel.from_dict(json.loads(text), name="default")


@dataclass(frozen=True)
class TailLinearization:
    """Tangent line ``F(x) ~ slope * x + y_intercept`` touching at ``x_bar``."""

    x_bar: float
    slope: float
    y_intercept: float

    def __call__(self, x):
        return self.slope * x + self.y_intercept

    def invert(self, u):
        return (u - self.y_intercept) / self.slope


def _warn_range(u, alpha, model):
    if not model.in_range(u, alpha):
        warnings.warn(
            f"(u={u}, alpha={alpha}) outside the correction model's fitted range "
            f"u in {model.u_range}, alpha in {model.alpha_range}",
            OutOfRangeWarning,
            stacklevel=3,
        )


def correction_factor(u, alpha, model=None):
    """``p(u, alpha)`` from ``model`` (default: :func:`default_model`).

    Inputs outside the model's validity box raise an
    :class:`OutOfRangeWarning` but still produce a value.
    """
    model = model or default_model()
    _warn_range(u, alpha, model)
    return model.p(u, alpha)


def shift_factor(alpha):
    """``gamma(alpha, alpha) / (e^-alpha alpha^alpha + Gamma(alpha))``.

    Evaluated as ``P(alpha, alpha) / (exp(alpha log alpha - alpha - lnGamma(alpha)) + 1)``
    so no Gamma-scale quantity is ever formed.
    """
    log_ratio = alpha * np.log(alpha) - alpha - ln_gamma(alpha)
    return regularized_p(alpha, alpha) / (np.exp(log_ratio) + 1.0)


def _x_bar(alpha, beta, p):
    if np.any(np.asarray(p) <= 0):
        raise DomainError(f"correction factor must be positive, got p={p}")
    mean = alpha / beta
    return mean + mean * shift_factor(alpha) / p


def _approx(u, alpha, beta, p):
    x_bar = _x_bar(alpha, beta, p)
    t = beta * x_bar
    # e^t t^-alpha Gamma(alpha) == 1 / (t * unit-rate density at t)
    inv = np.exp(-gamma_log_pdf(alpha, t)) / t
    return x_bar + x_bar * inv * (u - regularized_p(alpha, t))


def evaluation_point(u, params, model=None, *, p=None):
    """Tangent point ``x_bar = mean + delta``.

    ``p`` overrides the model's correction factor.
    """
    if p is None:
        p = correction_factor(u, params.alpha, model)
    return float(_x_bar(params.alpha, params.beta, p))


def tail_linearization(u, params, model=None, *, p=None):
    """Tangent line of the Gamma CDF at :func:`evaluation_point`."""
    x_bar = evaluation_point(u, params, model, p=p)
    t = params.beta * x_bar
    slope = params.beta * math.exp(gamma_log_pdf(params.alpha, t))
    return TailLinearization(x_bar, slope, params.cdf(x_bar) - x_bar * slope)


def gamma_quantile_approx(u, params, model=None, *, p=None):
    """Approximate Gamma quantile at confidence ``u`` by tangent-line inversion.

    Equivalent to ``tail_linearization(u, params, model).invert(u)`` but
    assembled so that ``u Gamma(alpha) - gamma(alpha, t)`` is evaluated as
    ``Gamma(alpha) (u - P(alpha, t))`` with the Gamma-scale factor folded
    into a log-space exponent.
    """
    if not 0.0 < u < 1.0:
        raise DomainError(f"confidence must lie in (0, 1), got {u}")
    if p is None:
        p = correction_factor(u, params.alpha, model)
    return float(_approx(u, params.alpha, params.beta, p))


def gamma_quantile_exact(u, params):
    """Reference quantile from root-finding on the regularized CDF."""
    return inverse_regularized_p(params.alpha, u) / params.beta


def relative_error(u, params, model=None):
    """``(approx - exact) / exact`` for the Gamma quantile at ``u``."""
    exact = gamma_quantile_exact(u, params)
    return (gamma_quantile_approx(u, params, model) - exact) / exact
