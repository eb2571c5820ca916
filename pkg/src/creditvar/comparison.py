"""Single-loss versus aggregate-loss quantile sweeps.

The aggregate side is a compound Poisson-Gamma loss whose shape is inflated to
``alpha' = (N + sqrt(N)) alpha`` and whose VaR is read at the shifted level
``u``. The single-loss side convolves ``N`` exponential or truncated
exponential severities with the same mean ``mu``.

Severity parameterisation: with ``alpha_unit=None`` (the default) the Gamma
rate is held at ``gamma_rate`` and the shape follows the mean,
``alpha = mu * gamma_rate``. Passing ``alpha_unit`` instead holds the shape
fixed and sets ``beta = alpha_unit / mu``.
"""

import csv
import math
import warnings
from dataclasses import asdict, dataclass

import numpy as np

from .loss_models import (
    ConvolutionLoss,
    Exponential,
    PoissonFrequency,
    TruncatedExponential,
    erlang_quantile,
    kappa_prime,
    shifted_confidence,
    solve_lambda_from_mean,
    trunc_quantile,
)
from .quantile import GammaParams, OutOfRangeWarning, default_model, gamma_quantile_approx
from .special import DomainError

__all__ = [
    "ComparisonRow",
    "SweepSpec",
    "CSV_HEADER",
    "alpha_prime",
    "aggregate_params",
    "compare_exponential",
    "compare_truncated",
    "kappa_prime_curve",
    "write_rows_csv",
    "format_number",
]

CSV_HEADER = (
    "N", "mu", "L", "kappa", "kappa_eff", "u",
    "q_single", "q_aggregate", "diff_abs", "diff_rel", "warn",
)
EN_CONVENTIONS = ("n", "n+sqrt")


@dataclass(frozen=True)
class ComparisonRow:
    n_obligors: int
    mu: float
    gross_exposure: float | None
    kappa: float
    kappa_effective: float
    u: float
    q_single: float
    q_aggregate: float
    diff_abs: float
    diff_rel: float
    warn: bool

    @classmethod
    def build(cls, n, mu, L, kappa, kappa_eff, u, q_single, q_aggregate, warn):
        diff = q_single - q_aggregate
        return cls(n, mu, L, kappa, kappa_eff, u, q_single, q_aggregate, diff, diff / q_single, warn)

    def as_record(self):
        return dict(zip(CSV_HEADER, asdict(self).values()))


@dataclass(frozen=True)
class SweepSpec:
    n_values: tuple
    mu_values: tuple
    L_values: tuple = ()
    kappa: float = 0.995
    alpha_unit: float | None = None
    gamma_rate: float = 1.0
    en_convention: str = "n"

    def __post_init__(self):
        for name in ("n_values", "mu_values", "L_values"):
            vals = tuple(getattr(self, name))
            object.__setattr__(self, name, vals)
            if any(not v > 0 for v in vals):
                raise DomainError(f"{name} must be positive")
        if not self.n_values or not self.mu_values:
            raise DomainError("need at least one N and one mu")
        if not 0.0 < self.kappa < 1.0:
            raise DomainError(f"kappa must lie in (0, 1), got {self.kappa}")
        if self.alpha_unit is not None and not self.alpha_unit > 0:
            raise DomainError("alpha_unit must be positive")
        if not self.gamma_rate > 0:
            raise DomainError("gamma_rate must be positive")
        if self.en_convention not in EN_CONVENTIONS:
            raise DomainError(f"en_convention must be one of {EN_CONVENTIONS}")

    def expected_events(self, n):
        return n + math.sqrt(n) if self.en_convention == "n+sqrt" else float(n)


def alpha_prime(n_obligors, alpha_unit):
    """Aggregate shape ``(N + sqrt(N)) * alpha``: one Poisson standard deviation above N."""
    if n_obligors < 1 or not alpha_unit > 0:
        raise DomainError("need N >= 1 and alpha > 0")
    return (n_obligors + math.sqrt(n_obligors)) * alpha_unit


def aggregate_params(n, mu, spec):
    """Gamma parameters of the aggregated loss for one sweep cell."""
    if spec.alpha_unit is None:
        beta = spec.gamma_rate
        alpha_unit = mu * beta
    else:
        alpha_unit = spec.alpha_unit
        beta = alpha_unit / mu
    return GammaParams(alpha_prime(n, alpha_unit), beta)


def _aggregate(n, mu, spec, model):
    params = aggregate_params(n, mu, spec)
    u = shifted_confidence(spec.kappa, PoissonFrequency(spec.expected_events(n)))
    return u, gamma_quantile_approx(u, params, model), model.in_range(u, params.alpha)


def compare_exponential(spec, model=None):
    """Rows for exponential severities, one per ``(N, mu)`` in sweep order."""
    model = model or default_model()
    rows = []
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", OutOfRangeWarning)
        for n in spec.n_values:
            for mu in spec.mu_values:
                conv = ConvolutionLoss(int(n), Exponential(1.0 / mu))
                q_s = erlang_quantile(spec.kappa, conv, model)
                u, q_a, agg_ok = _aggregate(n, mu, spec, model)
                ok = agg_ok and model.in_range(spec.kappa, float(n))
                rows.append(ComparisonRow.build(
                    int(n), float(mu), None, spec.kappa, spec.kappa, u, q_s, q_a, not ok,
                ))
    return rows


def compare_truncated(spec, model=None):
    """Rows for truncated severities, one per ``(N, mu, L)`` in sweep order.

    The rate is solved so the truncated mean equals ``mu``.
    Raises :class:`~creditvar.loss_models.TruncationError` when a cell has
    ``C = L * rate <= 9``.
    """
    if not spec.L_values:
        raise DomainError("truncated comparison needs at least one gross exposure L")
    model = model or default_model()
    rows = []
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", OutOfRangeWarning)
        for n in spec.n_values:
            for mu in spec.mu_values:
                u, q_a, agg_ok = _aggregate(n, mu, spec, model)
                for L in spec.L_values:
                    lam = solve_lambda_from_mean(mu, L)
                    conv = ConvolutionLoss(int(n), TruncatedExponential(lam, L))
                    kp = kappa_prime(spec.kappa, conv)
                    q_s = trunc_quantile(spec.kappa, conv, model)
                    ok = agg_ok and model.in_range(kp, float(n))
                    rows.append(ComparisonRow.build(
                        int(n), float(mu), float(L), spec.kappa, kp, u, q_s, q_a, not ok,
                    ))
    return rows


def kappa_prime_curve(c_values, n_values, kappa):
    """``(C, N, (1 - exp(-C))^N * kappa)`` for every pair, C-major."""
    out = []
    for c in c_values:
        if not c > 0:
            raise DomainError(f"C must be positive, got {c}")
        for n in n_values:
            kp = kappa if math.isinf(c) else kappa * math.exp(n * math.log1p(-math.exp(-c)))
            out.append((float(c), int(n), kp))
    return out


def format_number(v):
    """10 significant digits; fixed notation below 1e6, scientific above."""
    if v is None:
        return ""
    if isinstance(v, str):
        return v
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, int):
        return str(v)
    v = float(v)
    if v != 0 and math.isfinite(v) and abs(v) >= 1e6:
        return f"{v:.9e}"
    return f"{v:.10g}"


def write_rows_csv(rows, fh):
    """Comparison rows as CSV, floats at 10 significant digits."""
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for row in rows:
        writer.writerow([format_number(v) for v in row.as_record().values()])
