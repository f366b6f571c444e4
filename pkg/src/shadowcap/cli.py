"""Command-line interface.

Exit codes: 0 success, 2 validation failure, 3 solver non-convergence,
4 I/O error.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import allocation as alloc
from .domain import (
    InformationSet,
    NoRealEquilibriumError,
    ShadowCapError,
)
from .pipeline import PipelineOptions, export_figure_data, run_pipeline
from .reference import sample_posterior
from .scenario import ScenarioFormatError, parse_scenario, validation_report
from .views import PosteriorDistribution

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_SOLVER = 3
EXIT_IO = 4


def _fmt(value: float, full_precision: bool) -> str:
    return format(value, ".10g") if full_precision else format(value, ".4f")


def _vector_line(name: str, vec, full_precision: bool) -> str:
    body = "  ".join(_fmt(v, full_precision) for v in vec)
    return f"{name:<24s} {body}"


def _read_scenario(path: str):
    try:
        text = Path(path).read_text()
    except OSError as exc:
        print(f"error: cannot read {path}: {exc}", file=sys.stderr)
        raise SystemExit(EXIT_IO)
    try:
        return parse_scenario(text)
    except ScenarioFormatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        for issue in exc.issues:
            print(f"  {issue}", file=sys.stderr)
        raise SystemExit(EXIT_VALIDATION)


def cmd_validate(args) -> int:
    sf = _read_scenario(args.file)
    report = validation_report(sf)
    for issue in report.issues:
        print(issue)
    if report.ok:
        print(f"ok: {sf.market.n} assets"
              + (f", {sf.views.v} views" if sf.views is not None else ""))
        return EXIT_OK
    return EXIT_VALIDATION


def _run(sf, args):
    opts = PipelineOptions(
        tau=getattr(args, "tau", None),
        c=getattr(args, "c", None),
        gammas=(args.gamma,) if getattr(args, "gamma", None) is not None else (0, 1),
    )
    try:
        return run_pipeline(sf, opts)
    except NoRealEquilibriumError as exc:
        print(f"error: {exc}", file=sys.stderr)
        raise SystemExit(EXIT_SOLVER)


def cmd_equilibrium(args) -> int:
    sf = _read_scenario(args.file)
    bundle = _run(sf, args)
    fp = args.full_precision
    print(_vector_line("pi_c", bundle.pi_c, fp))
    print(_vector_line("extra_excess_returns", bundle.extra, fp))
    print(_vector_line("pi", bundle.pi, fp))
    print(_vector_line("w_capm", bundle.w_capm, fp))
    print(_vector_line("w_incomplete", bundle.w_incomplete, fp))
    print(_vector_line("w_investor", bundle.w_investor, fp))
    for name, metrics in (
        ("capm", bundle.metrics_capm),
        ("incomplete", bundle.metrics_incomplete),
        ("investor", bundle.metrics_investor),
    ):
        print(f"{name + '_return_risk':<24s} {_fmt(metrics[0], fp)}  {_fmt(metrics[1], fp)}")
    print(f"{'delta':<24s} {_fmt(bundle.delta, fp)}")
    print(f"{'lambda_m':<24s} {format(bundle.lambda_m, '.6e')}")
    print(f"{'delta_lambda':<24s} {_fmt(bundle.delta_lambda, fp)}")
    if args.gamma is not None:
        row = bundle.reference_rows[args.gamma]
        print(_vector_line(f"w_gamma{args.gamma}", row.weights, fp))
        print(f"{'gamma_return_risk':<24s} {_fmt(row.portfolio_return, fp)}"
              f"  {_fmt(row.portfolio_risk, fp)}")
    return EXIT_OK


def cmd_posterior(args) -> int:
    sf = _read_scenario(args.file)
    if sf.views is None:
        print("error: scenario has no views", file=sys.stderr)
        return EXIT_VALIDATION
    bundle = _run(sf, args)
    gamma = args.gamma if args.gamma is not None else 1
    row = bundle.posterior_rows[f"gamma{gamma}"]
    fp = args.full_precision
    print(_vector_line("posterior_mean", row.mean, fp))
    print(_vector_line("posterior_sd", np.sqrt(np.diag(row.covariance)), fp))
    print(_vector_line("allocation", row.weights, fp))
    print(f"{'return_risk':<24s} {_fmt(row.portfolio_return, fp)}  {_fmt(row.portfolio_risk, fp)}")
    print(f"{'view_fit':<24s} {_fmt(row.fit, fp)}")
    return EXIT_OK


def cmd_allocate(args) -> int:
    sf = _read_scenario(args.file)
    if sf.views is None:
        print("error: scenario has no views", file=sys.stderr)
        return EXIT_VALIDATION
    bundle = _run(sf, args)
    gamma = args.gamma if args.gamma is not None else 1
    row = bundle.posterior_rows[f"gamma{gamma}"]
    posterior_dist = PosteriorDistribution(mean=row.mean, covariance=row.covariance)
    info_set = None
    if args.assets:
        try:
            idx = tuple(int(tok) - 1 for tok in args.assets.split(","))
        except ValueError:
            print("error: --assets expects comma-separated indices", file=sys.stderr)
            return EXIT_VALIDATION
        info_set = InformationSet(investor_id="cli", known_assets=idx)
    request = alloc.AllocationRequest(
        posterior=posterior_dist,
        objective=args.objective,
        delta=args.delta if args.delta is not None else sf.market.delta,
        info_set=info_set,
        sigma_cap=args.sigma_cap,
    )
    try:
        outcome = alloc.run_allocation(request)
    except ShadowCapError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    fp = args.full_precision
    labels = [sf.market.asset_labels[i] for i in outcome.assets]
    for label, w in zip(labels, outcome.weights):
        print(f"{label:<24s} {_fmt(w, fp)}")
    risk = float(np.sqrt(outcome.weights @ _restrict(row.covariance, outcome.assets) @ outcome.weights))
    ret = float(outcome.weights @ row.mean[list(outcome.assets)])
    print(f"{'return_risk':<24s} {_fmt(ret, fp)}  {_fmt(risk, fp)}")
    if outcome.a is not None:
        print(f"{'two_fund_a_b':<24s} {_fmt(outcome.a, fp)}  {_fmt(outcome.b, fp)}")
    return EXIT_OK


def _restrict(cov, assets):
    idx = list(assets)
    return cov[np.ix_(idx, idx)]


def cmd_report(args) -> int:
    sf = _read_scenario(args.file)
    bundle = _run(sf, args)
    fp = args.full_precision
    table = args.table
    if table == 4:
        for name, vec in (
            ("pi_c", bundle.pi_c),
            ("extra", bundle.extra),
            ("pi", bundle.pi),
            ("w_capm", bundle.w_capm),
            ("w_incomplete", bundle.w_incomplete),
            ("w_investor", bundle.w_investor),
        ):
            print(_vector_line(name, vec, fp))
        for name, metrics in (
            ("capm", bundle.metrics_capm),
            ("incomplete", bundle.metrics_incomplete),
            ("investor", bundle.metrics_investor),
        ):
            print(f"{name + '_return_risk':<24s} {_fmt(metrics[0], fp)}  {_fmt(metrics[1], fp)}")
    elif table == 5:
        print(f"{'delta':<24s} {_fmt(bundle.delta, fp)}")
        print(f"{'lambda_m':<24s} {format(bundle.lambda_m, '.6e')}")
        print(f"{'delta_lambda':<24s} {_fmt(bundle.delta_lambda, fp)}")
    elif table == 6:
        print(_vector_line("pi", bundle.pi, fp))
        for g in sorted(bundle.reference_rows):
            row = bundle.reference_rows[g]
            print(_vector_line(f"w_gamma{g}", row.weights, fp))
        for g in sorted(bundle.reference_rows):
            row = bundle.reference_rows[g]
            print(f"{f'gamma{g}_return_risk':<24s} "
                  f"{_fmt(row.portfolio_return, fp)}  {_fmt(row.portfolio_risk, fp)}")
    elif table == 7:
        if not bundle.posterior_rows:
            print("error: scenario has no views", file=sys.stderr)
            return EXIT_VALIDATION
        for name in ("bl", "gamma0", "gamma1"):
            if name not in bundle.posterior_rows:
                continue
            row = bundle.posterior_rows[name]
            print(_vector_line(f"{name}_mean", row.mean, fp))
            print(_vector_line(f"{name}_weights", row.weights, fp))
        for name in ("bl", "gamma0", "gamma1"):
            if name not in bundle.posterior_rows:
                continue
            row = bundle.posterior_rows[name]
            print(f"{name + '_return_risk':<24s} "
                  f"{_fmt(row.portfolio_return, fp)}  {_fmt(row.portfolio_risk, fp)}")
    else:
        print(f"error: unknown table {table}", file=sys.stderr)
        return EXIT_VALIDATION
    return EXIT_OK


def cmd_figure(args) -> int:
    sf = _read_scenario(args.file)
    bundle = _run(sf, args)
    try:
        text = export_figure_data(bundle, args.id)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    try:
        Path(args.out).write_text(text)
    except OSError as exc:
        print(f"error: cannot write {args.out}: {exc}", file=sys.stderr)
        return EXIT_IO
    print(f"wrote figure {args.id} data to {args.out}")
    return EXIT_OK


def cmd_sample(args) -> int:
    sf = _read_scenario(args.file)
    if sf.views is None:
        print("error: scenario has no views", file=sys.stderr)
        return EXIT_VALIDATION
    bundle = _run(sf, args)
    gamma = args.gamma if args.gamma is not None else 1
    row = bundle.posterior_rows[f"gamma{gamma}"]
    draws = sample_posterior(row.mean, row.covariance, args.count, args.seed)
    header = "\t".join(sf.market.asset_labels)
    lines = [header]
    for draw in draws:
        lines.append("\t".join(format(v, ".10g") for v in draw))
    text = "\n".join(lines) + "\n"
    if args.out:
        try:
            Path(args.out).write_text(text)
        except OSError as exc:
            print(f"error: cannot write {args.out}: {exc}", file=sys.stderr)
            return EXIT_IO
        print(f"wrote {args.count} draws to {args.out}")
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_serve(args) -> int:
    from .service import serve

    serve(store_dir=args.store, host=args.host, port=args.port)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="shadowcap",
        description="Equilibria under incomplete information with Bayesian views",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, views=False):
        p.add_argument("file", help="scenario file")
        p.add_argument("--tau", type=float, default=None)
        p.add_argument("--gamma", type=int, choices=(0, 1), default=None)
        if views:
            p.add_argument("--c", type=float, default=None, help="view confidence in (0,1)")
        p.add_argument("--full-precision", action="store_true")

    p = sub.add_parser("validate", help="check a scenario file")
    p.add_argument("file")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("equilibrium", help="market equilibrium block")
    add_common(p)
    p.set_defaults(func=cmd_equilibrium)

    p = sub.add_parser("posterior", help="posterior mean, sd and allocation")
    add_common(p, views=True)
    p.set_defaults(func=cmd_posterior)

    p = sub.add_parser("allocate", help="portfolio under an objective")
    add_common(p, views=True)
    p.add_argument("--objective", required=True, choices=alloc.OBJECTIVES)
    p.add_argument("--sigma-cap", type=float, default=None)
    p.add_argument("--delta", type=float, default=None)
    p.add_argument("--assets", default=None, help="comma-separated 1-based indices")
    p.set_defaults(func=cmd_allocate)

    p = sub.add_parser("report", help="print one published-style table")
    add_common(p, views=True)
    p.add_argument("--table", type=int, required=True, choices=(4, 5, 6, 7))
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("figure", help="export figure data series")
    add_common(p, views=True)
    p.add_argument("--id", type=int, required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_figure)

    p = sub.add_parser("sample", help="draw from the posterior")
    add_common(p, views=True)
    p.add_argument("--count", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("serve", help="run the scenario HTTP service")
    p.add_argument("--store", required=True, help="scenario store directory")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8723)
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except SystemExit:
        raise
    except ShadowCapError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SOLVER if isinstance(exc, NoRealEquilibriumError) else EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
