"""Monte Carlo ground truth for single-loss and compound losses.

Paths are generated in fixed-size blocks. Block ``k`` draws from a Philox
stream keyed by ``SeedSequence(seed, spawn_key=(k,))``, so the samples depend
only on ``(seed, n_paths)`` and never on how many workers produced them.
"""

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.stats import binom

from .loss_models import Exponential, GammaSeverity, TruncatedExponential
from .quantile import GammaParams
from .special import DomainError

__all__ = [
    "SimulationSpec",
    "QuantileEstimate",
    "InsufficientSamplesError",
    "BLOCK_PATHS",
    "block_rng",
    "sample_severity",
    "simulate_losses",
    "iter_loss_blocks",
    "empirical_quantile",
    "dump_samples",
]

BLOCK_PATHS = 4096
MODES = ("single_loss", "compound")


class InsufficientSamplesError(ValueError):
    """Too few samples beyond the requested quantile."""


@dataclass(frozen=True)
class SimulationSpec:
    """One Monte Carlo experiment.

    ``single_loss``: ``n_obligors`` Bernoulli(``default_prob``) indicators
    times i.i.d. severities, summed per path.
    ``compound``: a Poisson(``frequency_mean``) count of i.i.d. severities.
    """

    mode: str
    severity: object
    n_paths: int
    seed: int = 0
    n_obligors: int | None = None
    frequency_mean: float | None = None
    default_prob: float = 1.0

    def __post_init__(self):
        if self.mode not in MODES:
            raise DomainError(f"mode must be one of {MODES}, got {self.mode!r}")
        if isinstance(self.severity, GammaParams):
            object.__setattr__(self, "severity", GammaSeverity(self.severity))
        if not isinstance(self.severity, (Exponential, TruncatedExponential, GammaSeverity)):
            raise TypeError(f"unsupported severity {self.severity!r}")
        if int(self.n_paths) != self.n_paths or self.n_paths < 1:
            raise DomainError("n_paths must be a positive integer")
        if not 0 <= int(self.seed) < 2**64:
            raise DomainError("seed must fit in an unsigned 64-bit integer")
        if not 0.0 < self.default_prob <= 1.0:
            raise DomainError("default_prob must lie in (0, 1]")
        if self.mode == "single_loss":
            if self.n_obligors is None or self.n_obligors < 1:
                raise DomainError("single_loss mode needs n_obligors >= 1")
        elif self.frequency_mean is None or not self.frequency_mean > 0:
            raise DomainError("compound mode needs a positive frequency_mean")


@dataclass(frozen=True)
class QuantileEstimate:
    point: float
    ci_low: float
    ci_high: float
    n_paths: int
    seed: int | None = None

    def contains(self, value):
        return self.ci_low <= value <= self.ci_high


def block_rng(seed, block):
    return np.random.Generator(
        np.random.Philox(np.random.SeedSequence(int(seed), spawn_key=(int(block),)))
    )


def sample_severity(rng, severity, size):
    """Draw severities; truncated exponentials by inverse CDF."""
    if isinstance(severity, Exponential):
        return rng.exponential(1.0 / severity.rate, size)
    if isinstance(severity, TruncatedExponential):
        lam, L = severity.rate, severity.gross_exposure
        mass = -math.expm1(-lam * L)  # 1 - exp(-lam L)
        u = rng.random(size)
        return -np.log1p(-u * mass) / lam
    p = severity.params
    return rng.gamma(p.alpha, 1.0 / p.beta, size)


def _block(spec, k):
    m = min(BLOCK_PATHS, spec.n_paths - k * BLOCK_PATHS)
    rng = block_rng(spec.seed, k)
    if spec.mode == "single_loss":
        s = sample_severity(rng, spec.severity, (m, spec.n_obligors))
        if spec.default_prob < 1.0:
            s *= rng.random((m, spec.n_obligors)) < spec.default_prob
        return s.sum(axis=1)
    counts = rng.poisson(spec.frequency_mean, m)
    draws = sample_severity(rng, spec.severity, int(counts.sum()))
    path = np.repeat(np.arange(m), counts)
    return np.bincount(path, weights=draws, minlength=m)


def _n_blocks(spec):
    return -(-spec.n_paths // BLOCK_PATHS)


def iter_loss_blocks(spec):
    """Yield path losses block by block, in path order."""
    for k in range(_n_blocks(spec)):
        yield _block(spec, k)


def simulate_losses(spec, workers=1):
    """All ``spec.n_paths`` path losses as one array, in path order."""
    nb = _n_blocks(spec)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            blocks = list(pool.map(lambda k: _block(spec, k), range(nb)))
    else:
        blocks = [_block(spec, k) for k in range(nb)]
    return np.concatenate(blocks)


def _nearest_rank(kappa, n):
    r = kappa * n
    k = round(r)
    if abs(r - k) > 1e-9 * max(n, 1):
        k = math.ceil(r)
    return min(max(k, 1), n)


def empirical_quantile(samples, kappa, *, confidence=0.95, min_tail=100, seed=None):
    """Nearest-rank quantile with a distribution-free order-statistic interval.

    The interval ``[X_(r), X_(s)]`` uses binomial quantiles of the number of
    samples at or below the true quantile, so its coverage is at least
    ``confidence`` for continuous data. ``min_tail`` is the least expected
    number of samples beyond the quantile.
    """
    if not 0.0 < kappa < 1.0:
        raise DomainError(f"kappa must lie in (0, 1), got {kappa}")
    x = np.asarray(samples, dtype=float).ravel()
    n = x.size
    if n * (1.0 - kappa) < min_tail * (1 - 1e-9):
        raise InsufficientSamplesError(
            f"{n} samples leave {n * (1 - kappa):.1f} beyond the {kappa} quantile; need {min_tail}"
        )
    k = _nearest_rank(kappa, n)
    tail = (1.0 - confidence) / 2.0
    r = max(int(binom.ppf(tail, n, kappa)), 1)
    s = min(int(binom.ppf(1.0 - tail, n, kappa)) + 1, n)
    ranks = sorted({r, k, s})
    part = np.partition(x, [i - 1 for i in ranks])
    return QuantileEstimate(
        point=float(part[k - 1]),
        ci_low=float(part[r - 1]),
        ci_high=float(part[s - 1]),
        n_paths=n,
        seed=seed,
    )


def dump_samples(samples, fh):
    """Write one loss per line at full double precision."""
    for v in np.asarray(samples, dtype=float).ravel():
        fh.write(f"{float(v)!r}\n")
