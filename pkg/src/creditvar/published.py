"""Published reference values reproduced by the reports."""

# relative error of the tangent-line Gamma quantile in percent, beta = 1,
# keyed by (u, alpha)
TABLE1_US = (0.95, 0.99, 0.995, 0.999)
TABLE1_ALPHAS = (1, 5, 10, 50, 100, 500, 1000)
_TABLE1_ROWS = {
    0.95: (-0.01, -0.02, -0.00, -0.00, -0.00, -0.06, -0.08),
    0.99: (-0.02, -0.08, -0.00, -0.00, -0.01, -0.17, -0.24),
    0.995: (-0.01, -0.05, -0.00, -0.02, -0.00, -0.18, -0.28),
    0.999: (-0.10, -0.88, -0.34, -0.08, -0.15, -0.53, -0.63),
}
TABLE1 = {
    (u, alpha): err
    for u, row in _TABLE1_ROWS.items()
    for alpha, err in zip(TABLE1_ALPHAS, row)
}

# single- vs aggregate-loss quantile differences at N = 500, mu = 500,
# kappa = 0.995; relative differences in percent
TABLE2 = {
    "exponential": {"kappa_eff": 0.995, "diff_abs": 17013.22, "diff_rel_pct": 6.09},
    6000: {"kappa_eff": 0.991, "diff_abs": 15475.54, "diff_rel_pct": 5.57},
    8000: {"kappa_eff": 0.994, "diff_abs": 16985.01, "diff_rel_pct": 6.08},
}
TABLE2_N = 500
TABLE2_MU = 500.0
TABLE2_KAPPA = 0.995

# log fit p = a log(b alpha) at u = 0.95
LOG_FIT_095 = (0.082, 17.007)
