import io
import math

import numpy as np
import pytest

from creditvar.comparison import (
    CSV_HEADER,
    SweepSpec,
    aggregate_params,
    alpha_prime,
    compare_exponential,
    compare_truncated,
    format_number,
    kappa_prime_curve,
    write_rows_csv,
)
from creditvar.loss_models import TruncationError
from creditvar.published import TABLE2
from creditvar.quantile import GammaParams, gamma_quantile_exact
from creditvar.special import DomainError


def test_alpha_prime():
    assert alpha_prime(500, 1) == pytest.approx(522.3607, abs=1e-4)
    assert alpha_prime(1, 2.5) == 5.0
    assert alpha_prime(10000, 0.5) == 5050.0
    with pytest.raises(DomainError):
        alpha_prime(0, 1.0)


def test_aggregate_params_conventions():
    default = aggregate_params(500, 500.0, SweepSpec((500,), (500.0,)))
    assert default == GammaParams(alpha_prime(500, 500.0), 1.0)
    unit = aggregate_params(500, 500.0, SweepSpec((500,), (500.0,), alpha_unit=1.0))
    assert unit == GammaParams(alpha_prime(500, 1.0), 1 / 500)
    # both conventions keep the per-severity mean at mu
    assert default.mean / alpha_prime(500, 1.0) == pytest.approx(500.0)
    assert unit.mean / alpha_prime(500, 1.0) == pytest.approx(500.0)


@pytest.mark.parametrize("kwargs", [
    dict(n_values=(), mu_values=(1.0,)),
    dict(n_values=(10,), mu_values=(-1.0,)),
    dict(n_values=(10,), mu_values=(1.0,), kappa=1.0),
    dict(n_values=(10,), mu_values=(1.0,), alpha_unit=0.0),
    dict(n_values=(10,), mu_values=(1.0,), en_convention="poisson"),
])
def test_sweep_spec_validation(kwargs):
    with pytest.raises(DomainError):
        SweepSpec(**kwargs)


def test_row_invariants_and_order():
    spec = SweepSpec((100, 300, 500), (200.0, 500.0), (6000.0, 8000.0))
    rows = compare_exponential(spec) + compare_truncated(spec)
    assert [(r.n_obligors, r.mu) for r in rows[:6]] == [
        (100, 200.0), (100, 500.0), (300, 200.0), (300, 500.0), (500, 200.0), (500, 500.0),
    ]
    assert [r.gross_exposure for r in rows[6:10]] == [6000.0, 8000.0, 6000.0, 8000.0]
    for r in rows:
        assert r.diff_abs == r.q_single - r.q_aggregate
        assert r.diff_rel * r.q_single == pytest.approx(r.diff_abs, rel=1e-12)
        assert r.u == pytest.approx(1 - (1 - 0.995) / r.n_obligors, rel=1e-15)
        assert r.warn


def test_reference_exponential_difference():
    (row,) = compare_exponential(SweepSpec((500,), (500.0,)))
    assert row.kappa_effective == 0.995
    # close to, not identical with, the reference values
    assert row.diff_abs == pytest.approx(TABLE2["exponential"]["diff_abs"], rel=0.02)
    assert 100 * row.diff_rel == pytest.approx(TABLE2["exponential"]["diff_rel_pct"], abs=0.1)


def test_reference_truncated_differences():
    rows = compare_truncated(SweepSpec((500,), (500.0,), (6000.0, 8000.0)))
    for row, L in zip(rows, (6000, 8000)):
        assert row.kappa_effective == pytest.approx(TABLE2[L]["kappa_eff"], abs=1e-3)
        assert row.diff_abs == pytest.approx(TABLE2[L]["diff_abs"], rel=0.05)
        assert 100 * row.diff_rel == pytest.approx(TABLE2[L]["diff_rel_pct"], abs=0.25)


@pytest.mark.parametrize("alpha_unit", [None, 1.0])
def test_difference_ordering(alpha_unit):
    spec = SweepSpec((500,), (500.0,), (6000.0, 8000.0), alpha_unit=alpha_unit)
    (exp_row,) = compare_exponential(spec)
    t6, t8 = compare_truncated(spec)
    assert t6.diff_abs < t8.diff_abs < exp_row.diff_abs


def test_truncated_diff_grows_with_exposure():
    spec = SweepSpec((500,), (500.0,), (5000.0, 6000.0, 8000.0, 12000.0, 50000.0))
    diffs = [r.diff_abs for r in compare_truncated(spec)]
    (exp_row,) = compare_exponential(spec)
    assert np.all(np.diff(diffs) > 0)
    assert diffs[-1] == pytest.approx(exp_row.diff_abs, rel=1e-6)


def test_unit_shape_convention_is_scale_free():
    spec = SweepSpec((100, 1000), (200.0, 500.0), alpha_unit=1.0)
    rows = compare_exponential(spec)
    assert rows[0].diff_rel == pytest.approx(rows[1].diff_rel, rel=1e-10)
    assert rows[2].diff_rel == pytest.approx(rows[3].diff_rel, rel=1e-10)


def test_exponential_sweep_shape():
    ns = tuple(range(100, 2001, 100))
    rows = compare_exponential(SweepSpec(ns, (200.0, 500.0)))
    by_mu = {mu: [r.diff_rel for r in rows if r.mu == mu] for mu in (200.0, 500.0)}
    for curve in by_mu.values():
        assert np.all(np.diff(curve) < 0)
    spread = np.abs(np.array(by_mu[200.0]) - np.array(by_mu[500.0]))
    assert spread[-1] < spread[0]


def test_single_obligor_uses_plain_confidence():
    (row,) = compare_exponential(SweepSpec((1,), (3.0,)))
    assert row.u == 0.995
    assert row.q_single == pytest.approx(gamma_quantile_exact(0.995, GammaParams(1, 1 / 3)), rel=0.005)


def test_enmean_convention_moves_u():
    base = compare_exponential(SweepSpec((500,), (500.0,)))[0]
    alt = compare_exponential(SweepSpec((500,), (500.0,), en_convention="n+sqrt"))[0]
    assert alt.u == pytest.approx(1 - 0.005 / (500 + math.sqrt(500)), rel=1e-15)
    assert alt.diff_abs != base.diff_abs
    assert alt.diff_rel == pytest.approx(base.diff_rel, rel=0.01)


def test_truncated_requires_exposures_and_large_c():
    with pytest.raises(DomainError):
        compare_truncated(SweepSpec((500,), (500.0,)))
    with pytest.raises(TruncationError):
        compare_truncated(SweepSpec((500,), (500.0,), (4000.0,)))


def test_kappa_prime_curve():
    table = kappa_prime_curve([12.0, math.inf], [0, 500], 0.995)
    assert [(c, n) for c, n, _ in table] == [(12.0, 0), (12.0, 500), (math.inf, 0), (math.inf, 500)]
    assert table[0][2] == 0.995
    assert table[1][2] == pytest.approx(0.995 * (1 - math.exp(-12)) ** 500, rel=1e-13)
    assert table[1][2] == pytest.approx(0.9920, abs=1e-4)
    assert table[3][2] == 0.995
    with pytest.raises(DomainError):
        kappa_prime_curve([0.0], [1], 0.995)


def test_format_number():
    assert format_number(None) == ""
    assert format_number(True) == "1"
    assert format_number(500) == "500"
    assert format_number(1 / 3) == "0.3333333333"
    assert format_number(279737.0213456) == "279737.0213"
    assert format_number(12345678.91) == "1.234567891e+07"
    assert format_number("exponential") == "exponential"


def test_write_rows_csv():
    rows = compare_exponential(SweepSpec((500,), (500.0,)))
    buf = io.StringIO()
    write_rows_csv(rows, buf)
    header, line = buf.getvalue().splitlines()
    assert header == ",".join(CSV_HEADER)
    fields = line.split(",")
    assert fields[:5] == ["500", "500", "", "0.995", "0.995"]
    assert float(fields[8]) == pytest.approx(rows[0].diff_abs, rel=1e-9)
    assert fields[-1] == "1"
