"""Re-derive the correction-factor model from scratch.

For each confidence ``u`` and shape ``alpha`` the correction factor ``p`` that
maximises the tangent-line quantile is located by grid search plus
golden-section refinement. Per ``u``, ``p*`` is fitted by
``a log(b alpha)``; ``a(u)`` and ``b(u)`` are then fitted by degree-6 and
degree-7 polynomials.
"""

import csv
import math
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import Polynomial

from .quantile import CorrectionModel, _approx

__all__ = [
    "CalibrationGrid",
    "CalibrationResult",
    "LogFit",
    "CalibrationError",
    "optimal_p",
    "optimal_p_row",
    "fit_log_model",
    "fit_polynomials",
    "calibrate",
    "write_diagnostics",
]

GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


class CalibrationError(ValueError):
    """Calibration inputs cannot support the requested fit."""


def _default_alphas():
    return tuple(float(a) for a in range(1, 101))


def _default_us():
    return tuple(float(u) for u in np.linspace(0.9, 0.999, 100))


@dataclass(frozen=True)
class CalibrationGrid:
    alphas: tuple = field(default_factory=_default_alphas)
    us: tuple = field(default_factory=_default_us)
    p_min: float = 0.05
    p_max: float = 1.5
    p_step: float = 0.01
    beta: float = 1.0
    tol: float = 1e-6

    def __post_init__(self):
        object.__setattr__(self, "alphas", tuple(float(a) for a in self.alphas))
        object.__setattr__(self, "us", tuple(float(u) for u in self.us))
        for name in ("alphas", "us"):
            vals = getattr(self, name)
            if not vals:
                raise CalibrationError(f"{name} grid is empty")
            if any(b <= a for a, b in zip(vals, vals[1:])):
                raise CalibrationError(f"{name} grid must be strictly increasing")
        if not 0 < self.p_min < self.p_max:
            raise CalibrationError("need 0 < p_min < p_max")
        if not self.p_step > 0:
            raise CalibrationError("p_step must be positive")

    @property
    def p_values(self):
        n = int(math.floor((self.p_max - self.p_min) / self.p_step + 1e-9))
        ps = self.p_min + self.p_step * np.arange(n + 1)
        if ps[-1] < self.p_max:
            ps = np.append(ps, self.p_max)
        return ps


@dataclass(frozen=True)
class LogFit:
    u: float
    a: float
    b: float
    residual: float
    r_squared: float


@dataclass
class CalibrationResult:
    grid: CalibrationGrid
    log_fits: list
    model: CorrectionModel
    # rows of (u, alpha, p_star, boundary_flag)
    diagnostics: list

    def fit_at(self, u):
        """Log fit for the grid confidence closest to ``u``."""
        return min(self.log_fits, key=lambda f: abs(f.u - u))


def optimal_p_row(u, alphas, grid):
    """Maximising correction factors for one ``u`` and many shapes.

    Returns ``(p_star, boundary)`` arrays aligned with ``alphas``.
    """
    alphas = np.asarray(alphas, dtype=float)
    ps = grid.p_values
    beta = grid.beta

    def q(alpha, p):
        return _approx(u, alpha, beta, p)

    values = q(alphas[:, None], ps[None, :])
    # argmax returns the first maximum: ties go to the smaller p
    idx = np.argmax(values, axis=1)
    lo = ps[np.maximum(idx - 1, 0)]
    hi = ps[np.minimum(idx + 1, len(ps) - 1)]

    # lockstep golden-section search on every bracket
    c = hi - GOLDEN * (hi - lo)
    d = lo + GOLDEN * (hi - lo)
    fc, fd = q(alphas, c), q(alphas, d)
    while np.max(hi - lo) > grid.tol:
        left = fc >= fd
        hi = np.where(left, d, hi)
        lo = np.where(left, lo, c)
        new_c = hi - GOLDEN * (hi - lo)
        new_d = lo + GOLDEN * (hi - lo)
        c_next = np.where(left, new_c, d)
        d_next = np.where(left, c, new_d)
        fc_next = np.where(left, q(alphas, new_c), fd)
        fd_next = np.where(left, fc, q(alphas, new_d))
        c, d, fc, fd = c_next, d_next, fc_next, fd_next
    p_star = np.where(fc >= fd, c, d)
    # the bracket never shrinks past a grid end, so pin boundary optima to it
    at_lo = (idx == 0) & (q(alphas, np.full_like(p_star, grid.p_min)) >= q(alphas, p_star))
    at_hi = (idx == len(ps) - 1) & (q(alphas, np.full_like(p_star, grid.p_max)) >= q(alphas, p_star))
    p_star = np.where(at_lo, grid.p_min, np.where(at_hi, grid.p_max, p_star))
    boundary = (p_star - grid.p_min <= grid.tol) | (grid.p_max - p_star <= grid.tol)
    return p_star, boundary


def optimal_p(u, alpha, beta=1.0, grid=None):
    """Correction factor maximising the tangent-line quantile at ``(u, alpha)``.

    Warns when the maximiser sits on a search-interval boundary.
    """
    grid = grid or CalibrationGrid(alphas=(alpha,), us=(u,), beta=beta)
    if grid.beta != beta:
        grid = CalibrationGrid(
            alphas=grid.alphas, us=grid.us, p_min=grid.p_min, p_max=grid.p_max,
            p_step=grid.p_step, beta=beta, tol=grid.tol,
        )
    p_star, boundary = optimal_p_row(u, [alpha], grid)
    if boundary[0]:
        warnings.warn(
            f"optimal p at (u={u}, alpha={alpha}) lies on the search boundary "
            f"[{grid.p_min}, {grid.p_max}]",
            RuntimeWarning,
            stacklevel=2,
        )
    return float(p_star[0])


def fit_log_model(alphas, p_stars):
    """Least-squares fit of ``p = a log(b alpha)``.

    Linear in ``log alpha``: slope ``a`` and intercept ``a log b``.
    Returns ``(a, b, residual_sum_of_squares)``.
    """
    x = np.log(np.asarray(alphas, dtype=float))
    y = np.asarray(p_stars, dtype=float)
    if x.shape != y.shape or x.size < 2:
        raise CalibrationError("need at least two (alpha, p) pairs of equal length")
    if np.ptp(x) == 0:
        raise CalibrationError("degenerate design: all alphas are equal")
    slope, intercept = np.polyfit(x, y, 1)
    if abs(slope) <= 1e-12 * max(abs(intercept), np.max(np.abs(y))):
        raise CalibrationError("p does not vary with alpha: b is undefined")
    resid = float(np.sum((y - (slope * x + intercept)) ** 2))
    return float(slope), float(math.exp(intercept / slope)), resid


def _poly_fit(us, ys, deg):
    with warnings.catch_warnings():
        warnings.simplefilter("error", np.exceptions.RankWarning)
        try:
            # fit in the scaled domain [-1, 1], then expand to monomials
            poly, (_, rank, _, _) = Polynomial.fit(us, ys, deg, full=True)
        except np.exceptions.RankWarning as exc:
            raise CalibrationError(
                f"rank-deficient degree-{deg} fit; use more distinct u values"
            ) from exc
    if rank < deg + 1:
        raise CalibrationError(f"rank-deficient degree-{deg} fit (rank {rank})")
    # terms below double resolution on [-1, 1] are round-off; the monomial
    # expansion would amplify them by up to ~1e9
    scaled = poly.coef
    scaled[np.abs(scaled) < 1e-14 * np.max(np.abs(scaled))] = 0.0
    coef = Polynomial(scaled, domain=poly.domain, window=poly.window).convert().coef
    return np.pad(coef, (0, deg + 1 - coef.size))


def fit_polynomials(fits, alpha_range=(1.0, 100.0)):
    """Fit ``a(u)`` (degree 6) and ``b(u)`` (degree 7) from ``(u, a, b)`` triples."""
    fits = [(float(u), float(a), float(b)) for u, a, b in fits]
    us = np.array([f[0] for f in fits])
    if np.unique(us).size < 8:
        raise CalibrationError(
            f"need at least 8 distinct u values for the degree-7 fit, got {np.unique(us).size}"
        )
    c = _poly_fit(us, [f[1] for f in fits], 6)
    d = _poly_fit(us, [f[2] for f in fits], 7)
    return CorrectionModel(
        c=c, d=d, alpha_range=alpha_range, u_range=(float(us.min()), float(us.max()))
    )


def _calibrate_u(args):
    u, grid = args
    p_star, boundary = optimal_p_row(u, grid.alphas, grid)
    a, b, resid = fit_log_model(grid.alphas, p_star)
    ss_tot = float(np.sum((p_star - p_star.mean()) ** 2))
    r2 = 1.0 - resid / ss_tot if ss_tot > 0 else 1.0
    return LogFit(u, a, b, resid, r2), p_star, boundary


def calibrate(grid=None, workers=1):
    """Run the full pipeline: optimal p per cell, log fits, polynomial fits.

    Cells for different ``u`` run in parallel when ``workers > 1``; results
    are collected in grid order either way.
    """
    grid = grid or CalibrationGrid()
    if len(grid.us) < 8:
        raise CalibrationError(f"need at least 8 u grid points, got {len(grid.us)}")
    if len(grid.alphas) < 2:
        raise CalibrationError("need at least 2 alpha grid points")
    jobs = [(u, grid) for u in grid.us]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            out = list(pool.map(_calibrate_u, jobs))
    else:
        out = [_calibrate_u(job) for job in jobs]

    log_fits, diagnostics = [], []
    for (fit, p_star, boundary), u in zip(out, grid.us):
        log_fits.append(fit)
        diagnostics.extend(
            (u, alpha, float(p), bool(flag))
            for alpha, p, flag in zip(grid.alphas, p_star, boundary)
        )
    model = fit_polynomials(
        [(f.u, f.a, f.b) for f in log_fits],
        alpha_range=(min(grid.alphas), max(grid.alphas)),
    )
    return CalibrationResult(grid, log_fits, model, diagnostics)


def write_diagnostics(result, fh):
    """Write ``u,alpha,p_star,boundary_flag`` rows to an open text file."""
    g = result.grid
    fh.write(f"# p_min={g.p_min} p_max={g.p_max} p_step={g.p_step} beta={g.beta}\n")
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(["u", "alpha", "p_star", "boundary_flag"])
    for u, alpha, p, flag in result.diagnostics:
        writer.writerow([f"{u:.10g}", f"{alpha:.10g}", f"{p:.10g}", int(flag)])
