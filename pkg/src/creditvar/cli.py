"""Command-line reports.

Every subcommand writes CSV (default) or JSON to stdout or ``--output``.
Exit status: 0 on success, 1 when a requested tolerance is not met, 2 on
invalid input.
"""

import argparse
import json
import math
import sys
import warnings
from contextlib import contextmanager
from pathlib import Path

import numpy as np

from . import published
from .calibration import CalibrationError, CalibrationGrid, calibrate, write_diagnostics
from .comparison import (
    CSV_HEADER,
    SweepSpec,
    alpha_prime,
    compare_exponential,
    compare_truncated,
    format_number,
    kappa_prime_curve,
)
from .loss_models import (
    ConvolutionLoss,
    Exponential,
    GammaSeverity,
    PoissonFrequency,
    TruncatedExponential,
    erlang_quantile,
    kappa_prime,
    solve_lambda_from_mean,
    trunc_quantile,
    var_aggregate,
)
from .montecarlo import SimulationSpec, dump_samples, empirical_quantile, simulate_losses
from .quantile import (
    CorrectionModel,
    GammaParams,
    OutOfRangeWarning,
    default_model,
    gamma_quantile_approx,
    gamma_quantile_exact,
)
from .special import ConvergenceError, DomainError


class UsageError(Exception):
    pass


# -- argument parsing helpers ------------------------------------------------

def _number_list(text, cast=float):
    """Comma list with optional ``lo..hi[:step]`` ranges (step defaults to lo)."""
    out = []
    for part in str(text).split(","):
        part = part.strip()
        if not part:
            continue
        if ".." in part:
            span, _, step = part.partition(":")
            lo, hi = (cast(v) for v in span.split(".."))
            step = cast(step) if step else lo
            if not step > 0 or hi < lo:
                raise argparse.ArgumentTypeError(f"bad range {part!r}")
            n = int(math.floor((hi - lo) / step + 1e-9))
            out.extend(cast(lo + i * step) for i in range(n + 1))
        else:
            out.append(cast(part))
    if not out:
        raise argparse.ArgumentTypeError("empty list")
    return tuple(out)


def _int_list(text):
    return _number_list(text, int)


def _float_list(text):
    return _number_list(text, float)


def _read_config(path):
    cfg = {}
    for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise UsageError(f"{path}:{lineno}: expected key=value")
        cfg[key.strip().replace("-", "_")] = value.strip()
    return cfg


def _common(p, model=True):
    p.add_argument("--config", help="flat key=value file; flags override it")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--output", "-o", help="write to this file instead of stdout")
    if model:
        p.add_argument("--model", help="correction-model JSON (default: packaged model)")


def _sweep_flags(p):
    p.add_argument("--kappa", type=float, default=0.995)
    p.add_argument("--alpha-unit", type=float, default=None,
                   help="hold the per-severity Gamma shape fixed (beta = alpha/mu)")
    p.add_argument("--gamma-rate", type=float, default=1.0,
                   help="per-severity Gamma rate when --alpha-unit is not given")
    p.add_argument("--enmean", choices=("n", "n+sqrt"), default="n",
                   help="expected event count used in the shifted confidence")


def build_parser():
    parser = argparse.ArgumentParser(prog="creditvar", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("quantile", help="approximate vs exact Gamma quantile")
    _common(p)
    p.add_argument("--alpha", type=float)
    p.add_argument("--beta", type=float, default=1.0)
    p.add_argument("--u", type=float)
    p.add_argument("--oracle", action=argparse.BooleanOptionalAction, default=True,
                   help="also compute the root-finding quantile and relative error")

    p = sub.add_parser("report-table1", help="relative-error grid, beta = 1")
    _common(p)

    p = sub.add_parser("report-table2", help="exponential vs truncated comparison at N = mu = 500")
    _common(p)
    _sweep_flags(p)

    p = sub.add_parser("compare", help="single vs aggregate quantile sweep")
    _common(p)
    p.add_argument("mode", choices=("exp", "trunc"))
    p.add_argument("--n-list", type=_int_list, default=(500,))
    p.add_argument("--mu-list", type=_float_list, default=(500.0,))
    p.add_argument("--L-list", dest="L_list", type=_float_list, default=())
    _sweep_flags(p)

    p = sub.add_parser("kappa-curve", help="effective confidence vs exposure multiple C")
    _common(p, model=False)
    p.add_argument("--c-list", type=_float_list, default=_float_list("1..30:1"))
    p.add_argument("--n-list", type=_int_list, default=(100, 500, 1000))
    p.add_argument("--kappa", type=float, default=0.995)

    p = sub.add_parser("calibrate", help="re-derive the correction model")
    _common(p, model=False)
    p.add_argument("--alphas", type=_float_list, default=_float_list("1..100:1"))
    p.add_argument("--u-min", type=float, default=0.9)
    p.add_argument("--u-max", type=float, default=0.999)
    p.add_argument("--u-count", type=int, default=100)
    p.add_argument("--p-min", type=float, default=0.05)
    p.add_argument("--p-max", type=float, default=1.5)
    p.add_argument("--p-step", type=float, default=0.01)
    p.add_argument("--beta", type=float, default=1.0)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--diagnostics", help="write u,alpha,p_star,boundary_flag CSV here")

    p = sub.add_parser("mc-validate", help="Monte Carlo check of a closed-form quantile")
    _common(p)
    p.add_argument("--mode", choices=("single", "compound"), default="single")
    p.add_argument("--severity", choices=("exp", "trunc", "gamma"), default="exp")
    p.add_argument("--n-obligors", type=int, default=500)
    p.add_argument("--rate", type=float, help="severity rate (exp/trunc)")
    p.add_argument("--mu", type=float, help="severity mean; trunc solves the rate from it")
    p.add_argument("--gross-exposure", type=float)
    p.add_argument("--alpha", type=float, help="Gamma severity shape")
    p.add_argument("--beta", type=float, help="Gamma severity rate")
    p.add_argument("--frequency-mean", type=float, help="Poisson mean (compound)")
    p.add_argument("--default-prob", type=float, default=1.0)
    p.add_argument("--kappa", type=float, default=0.995)
    p.add_argument("--paths", type=int, default=1_000_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--tolerance", type=float, default=0.02,
                   help="max relative gap between closed form and empirical quantile")
    p.add_argument("--dump", help="write raw path losses, one per line")
    return parser


def _subparser(parser, name):
    for action in parser._actions:
        if isinstance(action, argparse._SubParsersAction):
            return action.choices[name]
    raise KeyError(name)


def parse_args(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.config:
        cfg = _read_config(args.config)
        sp = _subparser(parser, args.command)
        dests = {a.dest: a for a in sp._actions}
        unknown = sorted(set(cfg) - set(dests) - {"config"})
        if unknown:
            raise UsageError(f"unknown config keys for {args.command}: {', '.join(unknown)}")
        for key, value in cfg.items():
            action = dests.get(key)
            if isinstance(action, argparse.BooleanOptionalAction):
                cfg[key] = value.lower() in ("1", "true", "yes", "on")
        sp.set_defaults(**cfg)
        args = parser.parse_args(argv)
    return args


# -- output ---------------------------------------------------------------------

@contextmanager
def _sink(path):
    if path:
        with open(path, "w", newline="") as fh:
            yield fh
    else:
        yield sys.stdout


def _emit(args, header, rows, extra=None):
    with _sink(args.output) as fh:
        if args.format == "json":
            payload = {"rows": [dict(zip(header, r)) for r in rows]}
            if extra:
                payload.update(extra)
            fh.write(json.dumps(payload, indent=2, default=_json_default) + "\n")
        else:
            if extra:
                for k, v in extra.items():
                    fh.write(f"# {k}={v}\n")
            fh.write(",".join(header) + "\n")
            for r in rows:
                fh.write(",".join(format_number(v) for v in r) + "\n")


def _json_default(v):
    if isinstance(v, (np.floating, np.integer, np.bool_)):
        return v.item()
    raise TypeError(type(v))


def _model(args):
    return CorrectionModel.load(args.model) if getattr(args, "model", None) else default_model()


def _need(args, *names):
    missing = [n for n in names if getattr(args, n) is None]
    if missing:
        raise UsageError("missing required option(s): " + ", ".join("--" + n.replace("_", "-") for n in missing))


# -- subcommands ------------------------------------------------------------------

def cmd_quantile(args):
    _need(args, "alpha", "u")
    params = GammaParams(args.alpha, args.beta)
    approx = gamma_quantile_approx(args.u, params, _model(args))
    header = ["alpha", "beta", "u", "q_approx"]
    row = [args.alpha, args.beta, args.u, approx]
    if args.oracle:
        exact = gamma_quantile_exact(args.u, params)
        header += ["q_exact", "rel_err_pct"]
        row += [exact, 100.0 * (approx - exact) / exact]
    _emit(args, header, [row])
    return 0


def cmd_report_table1(args):
    model = _model(args)
    header = ["u", "alpha", "q_approx", "q_exact", "rel_err_pct", "published_pct"]
    rows = []
    for u in published.TABLE1_US:
        for alpha in published.TABLE1_ALPHAS:
            params = GammaParams(float(alpha), 1.0)
            approx = gamma_quantile_approx(u, params, model)
            exact = gamma_quantile_exact(u, params)
            rows.append([u, alpha, approx, exact, 100.0 * (approx - exact) / exact,
                         published.TABLE1[(u, alpha)]])
    _emit(args, header, rows)
    return 0


def _sweep(args, n_values, mu_values, L_values=()):
    return SweepSpec(
        n_values=tuple(n_values), mu_values=tuple(mu_values), L_values=tuple(L_values),
        kappa=args.kappa, alpha_unit=args.alpha_unit, gamma_rate=args.gamma_rate,
        en_convention=args.enmean,
    )


def cmd_report_table2(args):
    model = _model(args)
    n, mu = published.TABLE2_N, published.TABLE2_MU
    rows_exp = compare_exponential(_sweep(args, [n], [mu]), model)
    rows_tr = compare_truncated(_sweep(args, [n], [mu], [6000.0, 8000.0]), model)
    header = ["case", "kappa_eff", "q_single", "q_aggregate", "diff_abs", "diff_rel_pct",
              "published_kappa_eff", "published_diff_abs", "published_diff_rel_pct"]
    rows = []
    for key, r in zip(["exponential", 6000, 8000], rows_exp + rows_tr):
        ref = published.TABLE2[key]
        case = key if key == "exponential" else f"L={key}"
        rows.append([case, r.kappa_effective, r.q_single, r.q_aggregate, r.diff_abs,
                     100.0 * r.diff_rel, ref["kappa_eff"], ref["diff_abs"], ref["diff_rel_pct"]])
    _emit(args, header, rows)
    return 0


def cmd_compare(args):
    spec = _sweep(args, args.n_list, args.mu_list, args.L_list)
    rows = compare_exponential(spec, _model(args)) if args.mode == "exp" else compare_truncated(spec, _model(args))
    _emit(args, list(CSV_HEADER), [list(r.as_record().values()) for r in rows])
    return 0


def cmd_kappa_curve(args):
    rows = kappa_prime_curve(args.c_list, args.n_list, args.kappa)
    _emit(args, ["C", "N", "kappa_eff"], [list(r) for r in rows])
    return 0


def cmd_calibrate(args):
    if args.u_count < 1:
        raise UsageError("--u-count must be positive")
    us = np.linspace(args.u_min, args.u_max, args.u_count) if args.u_count > 1 else [args.u_min]
    grid = CalibrationGrid(
        alphas=args.alphas, us=tuple(us), p_min=args.p_min, p_max=args.p_max,
        p_step=args.p_step, beta=args.beta,
    )
    result = calibrate(grid, workers=args.workers)
    if args.diagnostics:
        with open(args.diagnostics, "w", newline="") as fh:
            write_diagnostics(result, fh)
    with _sink(args.output) as fh:
        fh.write(json.dumps(result.model.to_dict(), indent=2) + "\n")
    return 0


def _mc_setup(args):
    """Simulation spec plus (approximate, exact) closed-form quantiles."""
    model = _model(args)
    if args.mode == "compound" or args.severity == "gamma":
        if args.mode != "compound" or args.severity != "gamma":
            raise UsageError("compound mode pairs with --severity gamma")
        _need(args, "alpha", "beta", "frequency_mean")
        sev = GammaSeverity(GammaParams(args.alpha, args.beta))
        spec = SimulationSpec("compound", sev, args.paths, args.seed,
                              frequency_mean=args.frequency_mean)
        freq = PoissonFrequency(args.frequency_mean)
        # aggregate modelled as one Gamma with the inflated shape, as in the
        # comparison sweeps; the raw severity quantile is reported for contrast
        agg = GammaParams(alpha_prime(args.frequency_mean, args.alpha), args.beta)
        return spec, {
            "alpha_prime": agg.alpha,
            "severity_only": var_aggregate(args.kappa, freq, sev, exact=True),
            "closed_form": var_aggregate(args.kappa, freq, agg, model),
            "closed_form_exact": var_aggregate(args.kappa, freq, agg, exact=True),
        }
    if args.severity == "exp":
        if args.rate is None and args.mu is None:
            raise UsageError("--severity exp needs --rate or --mu")
        sev = Exponential(args.rate if args.rate is not None else 1.0 / args.mu)
        conv = ConvolutionLoss(args.n_obligors, sev)
        forms = {
            "closed_form": erlang_quantile(args.kappa, conv, model),
            "closed_form_exact": erlang_quantile(args.kappa, conv, exact=True),
        }
    else:
        _need(args, "gross_exposure")
        if args.rate is not None:
            rate = args.rate
        elif args.mu is not None:
            rate = solve_lambda_from_mean(args.mu, args.gross_exposure)
        else:
            raise UsageError("--severity trunc needs --rate or --mu")
        sev = TruncatedExponential(rate, args.gross_exposure)
        conv = ConvolutionLoss(args.n_obligors, sev)
        forms = {
            "kappa_eff": kappa_prime(args.kappa, conv),
            "closed_form": trunc_quantile(args.kappa, conv, model),
            "closed_form_exact": trunc_quantile(args.kappa, conv, exact=True),
        }
    spec = SimulationSpec("single_loss", sev, args.paths, args.seed,
                          n_obligors=args.n_obligors, default_prob=args.default_prob)
    return spec, forms


def cmd_mc_validate(args):
    spec, forms = _mc_setup(args)
    samples = simulate_losses(spec, workers=args.workers)
    if args.dump:
        with open(args.dump, "w") as fh:
            dump_samples(samples, fh)
    est = empirical_quantile(samples, args.kappa, seed=spec.seed)
    gap = (forms["closed_form"] - est.point) / est.point
    passed = abs(gap) <= args.tolerance
    header = ["kappa", "paths", "seed", "empirical", "ci_low", "ci_high",
              *forms, "rel_gap", "exact_in_ci", "pass"]
    row = [args.kappa, spec.n_paths, spec.seed, est.point, est.ci_low, est.ci_high,
           *forms.values(), gap, est.contains(forms["closed_form_exact"]), passed]
    _emit(args, header, [row])
    return 0 if passed else 1


COMMANDS = {
    "quantile": cmd_quantile,
    "report-table1": cmd_report_table1,
    "report-table2": cmd_report_table2,
    "compare": cmd_compare,
    "kappa-curve": cmd_kappa_curve,
    "calibrate": cmd_calibrate,
    "mc-validate": cmd_mc_validate,
}


def main(argv=None):
    try:
        args = parse_args(argv)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", OutOfRangeWarning)
            return COMMANDS[args.command](args)
    except (UsageError, DomainError, CalibrationError, ConvergenceError, OSError, ValueError) as exc:
        print(f"creditvar: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
