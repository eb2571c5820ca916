import math

import pytest
from scipy import stats

from creditvar.loss_models import (
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
    trunc_exp_mean_direct,
    trunc_quantile,
    var_aggregate,
)
from creditvar.quantile import GammaParams, OutOfRangeWarning
from creditvar.special import DomainError


def trunc(n, lam, L):
    return ConvolutionLoss(n, TruncatedExponential(lam, L))


def test_shifted_confidence():
    assert shifted_confidence(0.995, PoissonFrequency(500)) == pytest.approx(0.99999, abs=1e-15)
    assert shifted_confidence(0.97, PoissonFrequency(1)) == pytest.approx(0.97, abs=1e-15)
    assert shifted_confidence(0.9, PoissonFrequency(100)) == pytest.approx(0.999, abs=1e-15)
    with pytest.raises(DomainError):
        shifted_confidence(0.5, PoissonFrequency(0.4))
    with pytest.raises(DomainError):
        PoissonFrequency(0)


def test_var_aggregate():
    q = var_aggregate(0.995, PoissonFrequency(500), GammaSeverity(GammaParams(1, 1)), exact=True)
    assert q == pytest.approx(-math.log(1e-5), rel=1e-9)
    assert q == pytest.approx(11.5129, abs=1e-4)
    # u = 0.99999 is far outside the fitted u range: warned extrapolation,
    # still an underestimate
    with pytest.warns(OutOfRangeWarning):
        approx = var_aggregate(0.995, PoissonFrequency(500), GammaParams(1, 1))
    assert 0 < approx < q
    # E[N] = 1 leaves the confidence unchanged
    params = GammaParams(3.0, 0.5)
    assert var_aggregate(0.99, PoissonFrequency(1), params, exact=True) == pytest.approx(
        stats.gamma.ppf(0.99, 3.0, scale=2.0), rel=1e-10
    )


def test_var_aggregate_large_shape():
    params = GammaParams((500 + math.sqrt(500)) * 1.0, 1 / 500)
    exact = var_aggregate(0.995, PoissonFrequency(500), params, exact=True)
    with pytest.warns(OutOfRangeWarning):
        approx = var_aggregate(0.995, PoissonFrequency(500), params)
    oracle = stats.gamma.isf(1e-5, params.alpha, scale=1 / params.beta)
    assert exact == pytest.approx(oracle, rel=1e-10)
    assert -0.06 < (approx - exact) / exact < 0


def test_erlang_cdf():
    assert erlang_cdf(1.0, ConvolutionLoss(1, Exponential(1.0))) == pytest.approx(0.6321206, abs=1e-7)
    assert erlang_cdf(0.0, ConvolutionLoss(3, Exponential(1.0))) == 0.0
    assert erlang_cdf(5000, ConvolutionLoss(10, Exponential(0.002))) == pytest.approx(0.5420703, abs=1e-7)
    with pytest.raises(TypeError):
        erlang_cdf(1.0, trunc(1, 1.0, 12.0))


def test_erlang_quantile():
    conv = ConvolutionLoss(1, Exponential(1.0))
    assert erlang_quantile(0.995, conv) == pytest.approx(5.2978, abs=5e-3)
    assert erlang_quantile(0.995, conv, exact=True) == pytest.approx(5.29832, abs=1e-5)
    big = ConvolutionLoss(500, Exponential(0.002))
    oracle = stats.gamma.ppf(0.995, 500, scale=500)
    assert erlang_quantile(0.995, big, exact=True) == pytest.approx(oracle, rel=1e-10)
    assert 279_000 < oracle < 280_000
    assert erlang_quantile(0.995, big) == pytest.approx(oracle, rel=0.01)


def test_from_rates_takes_infimum():
    conv = ConvolutionLoss.from_rates([0.003, 0.002, 0.005])
    assert conv.n_obligors == 3 and conv.lambda_prime == 0.002
    assert isinstance(conv.severity, Exponential)
    tconv = ConvolutionLoss.from_rates([0.004, 0.002], gross_exposure=6000)
    assert isinstance(tconv.severity, TruncatedExponential)
    with pytest.raises(DomainError):
        ConvolutionLoss.from_rates([])
    with pytest.raises(DomainError):
        ConvolutionLoss(0, Exponential(1.0))


def test_trunc_exp_mean():
    assert trunc_exp_mean(1.0, math.inf) == 1.0
    expected = 1 - 12 * math.exp(-12) / (1 - math.exp(-12))
    assert trunc_exp_mean(1.0, 12.0) == pytest.approx(expected, rel=1e-14)
    assert trunc_exp_mean(1.0, 12.0) == pytest.approx(0.9999263, abs=1e-7)
    for lam, L in [(0.5, 3.0), (1e-3, 6000.0), (2.0, 0.01)]:
        assert trunc_exp_mean(lam, L) == pytest.approx(trunc_exp_mean_direct(lam, L), rel=1e-9)
    # moments by numerical integration of the truncated density
    d = stats.truncexpon(b=3.0, scale=2.0)
    assert trunc_exp_mean(0.5, 6.0) == pytest.approx(d.mean(), rel=1e-12)
    # tiny C approaches L/2
    assert trunc_exp_mean(1e-9, 10.0) == pytest.approx(5.0, rel=1e-6)


def test_solve_lambda_from_mean():
    lam = solve_lambda_from_mean(500, 6000)
    assert lam == pytest.approx(1.99985e-3, rel=1e-5)
    assert 6000 * lam == pytest.approx(11.999, abs=1e-3)
    assert trunc_exp_mean(lam, 6000) == pytest.approx(500, rel=1e-13)
    lam8 = solve_lambda_from_mean(500, 8000)
    assert lam8 == pytest.approx(2.0e-3, rel=1e-4)
    assert 8000 * lam8 == pytest.approx(16.0, abs=1e-3)
    assert solve_lambda_from_mean(250.0, math.inf) == 1 / 250
    for mu in (10.0, 2999.0):
        assert trunc_exp_mean(solve_lambda_from_mean(mu, 6000), 6000) == pytest.approx(mu, rel=1e-12)


@pytest.mark.parametrize("mu, L", [(3000, 6000), (4000, 6000), (0, 6000)])
def test_solve_lambda_infeasible(mu, L):
    with pytest.raises(DomainError):
        solve_lambda_from_mean(mu, L)


def test_trunc_conv_cdf():
    conv = trunc(1, 1.0, 12.0)
    assert trunc_conv_cdf(0.0, conv) == 0.0
    assert trunc_conv_cdf(1.0, conv) == pytest.approx((1 - math.exp(-1)) / (1 - math.exp(-12)), rel=1e-13)
    assert trunc_conv_cdf(1.0, conv) == pytest.approx(0.6321245, abs=1e-7)
    # single obligor matches the truncated exponential CDF below L
    d = stats.truncexpon(b=12.0)
    for x in (0.5, 4.0, 11.0):
        assert trunc_conv_cdf(x, conv) == pytest.approx(d.cdf(x), rel=1e-12)
    conv5 = trunc(5, 0.5, 20.0)
    assert trunc_conv_cdf(1e6, conv5) == pytest.approx((1 - math.exp(-10)) ** -5, rel=1e-12)
    assert trunc_conv_cdf(1e6, conv5) > 1.0


def test_kappa_prime():
    lam6 = solve_lambda_from_mean(500, 6000)
    lam8 = solve_lambda_from_mean(500, 8000)
    kp6 = kappa_prime(0.995, trunc(500, lam6, 6000))
    kp8 = kappa_prime(0.995, trunc(500, lam8, 8000))
    assert kp6 == pytest.approx(0.991, abs=1e-3)
    assert kp8 == pytest.approx(0.994, abs=1e-3)
    assert kappa_prime(0.995, trunc(500, 0.002, math.inf)) == 0.995
    previous = 0.0
    for L in (5000, 6000, 8000, 12000, 20000):
        kp = kappa_prime(0.995, trunc(500, 0.002, L))
        assert previous < kp < 0.995
        previous = kp


def test_trunc_quantile():
    lam = solve_lambda_from_mean(500, 6000)
    conv6 = trunc(500, lam, 6000)
    q6 = trunc_quantile(0.995, conv6)
    assert q6 < erlang_quantile(0.995, ConvolutionLoss(500, Exponential(lam)))
    far = trunc(500, 0.002, 1e9)
    assert trunc_quantile(0.995, far) == pytest.approx(
        erlang_quantile(0.995, ConvolutionLoss(500, Exponential(0.002))), rel=1e-12
    )
    # N = 1 on the exact path is the plain exponential inverse at kappa'
    one = trunc(1, 1.0, 12.0)
    kp = 0.995 * (1 - math.exp(-12))
    assert trunc_quantile(0.995, one, exact=True) == pytest.approx(-math.log1p(-kp), rel=1e-12)
    assert trunc_quantile(0.995, one) == pytest.approx(-math.log1p(-kp), rel=2e-3)


@pytest.mark.parametrize("L", [4000.0, 4500.0])
def test_trunc_quantile_rejects_small_exposure(L):
    lam = solve_lambda_from_mean(500, L)
    with pytest.raises(TruncationError, match="C = L \\* rate > 9"):
        trunc_quantile(0.995, trunc(500, lam, L))
