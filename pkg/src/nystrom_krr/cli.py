"""Command-line harness.

Subcommands: rate-sweep, cost-sweep, lambda-sweep, diagnostics, lambda0.
Each takes a JSON config (see README for the schema) and writes CSV results
plus a plain-text summary into the output directory.

Exit codes: 0 success, 2 a configured tolerance failed, 1 error.
"""

from __future__ import annotations

import argparse
import os
import sys

from . import experiments as exp
from .nystrom import subsample_size
from .spectral import analytic_profile, lambda0


def _add_common(parser):
    parser.add_argument("--config", required=True, help="path to the JSON config file")
    parser.add_argument("--seed", type=int, default=None, help="override the config seed")
    parser.add_argument("--out-dir", default=None, help="override the output directory")
    parser.add_argument("--reps", type=int, default=None, help="override repetitions")


def _load(args) -> exp.ExperimentConfig:
    config = exp.load_config(args.config)
    if args.seed is not None:
        config.seed = args.seed
    if args.out_dir is not None:
        config.outputs = args.out_dir
    if args.reps is not None:
        if args.reps < 1:
            raise ValueError("--reps must be >= 1")
        config.repetitions = args.reps
    return config


def _finish(config, name, fields, rows, summary, passed, timing=None) -> int:
    out = config.outputs
    os.makedirs(out, exist_ok=True)
    exp.write_rows(os.path.join(out, f"{name}.csv"), fields, rows)
    if timing is not None:
        exp.write_rows(os.path.join(out, f"{name}_timing.csv"), exp.TIMING_CSV_FIELDS, timing)
    exp.write_summary(os.path.join(out, f"{name}_summary.txt"), summary)
    for line in summary:
        print(line)
    return 0 if passed else 2


def cmd_rate_sweep(args) -> int:
    config = _load(args)
    fit, rows, timing, summary, passed = exp.run_rate_sweep(config)
    return _finish(config, "rate_sweep", exp.RATE_CSV_FIELDS, rows, summary, passed, timing)


def cmd_cost_sweep(args) -> int:
    config = _load(args)
    _, _, rows, timing, summary, passed = exp.run_cost_sweep(config)
    return _finish(config, "cost_sweep", exp.COST_CSV_FIELDS, rows, summary, passed, timing)


def cmd_lambda_sweep(args) -> int:
    config = _load(args)
    rows, summary, passed = exp.run_lambda_sensitivity(config)
    return _finish(config, "lambda_sweep", exp.LAMBDA_CSV_FIELDS, rows, summary, passed)


def cmd_diagnostics(args) -> int:
    config = _load(args)
    reports, summary, passed = exp.run_diagnostics(config)
    out = config.outputs
    os.makedirs(out, exist_ok=True)
    from .diagnostics import reports_to_csv

    reports_to_csv(reports, os.path.join(out, "diagnostics.csv"))
    exp.write_summary(os.path.join(out, "diagnostics_summary.txt"), summary)
    for line in summary:
        print(line)
    return 0 if passed else 2


def cmd_lambda0(args) -> int:
    config = _load(args)
    if not config.kernel.is_designed:
        raise ValueError("lambda0 needs a designed_spectral kernel in the config")
    n = args.n
    profile = analytic_profile(config.kernel.decay, config.kernel.truncation)
    lam = lambda0(profile, n)
    m = subsample_size(n, lam, config.size_rule, kernel=config.kernel)
    print(f"n={n} lambda0={lam:.8g} m={m}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nystrom-krr",
        description="Nystrom kernel ridge regression sweeps and bound checks",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("rate-sweep", help="error vs sample size, fits the rate exponent")
    _add_common(p)
    p.set_defaults(fn=cmd_rate_sweep)

    p = sub.add_parser("cost-sweep", help="flops vs sample size under the size rule")
    _add_common(p)
    p.set_defaults(fn=cmd_cost_sweep)

    p = sub.add_parser("lambda-sweep", help="error across a lambda grid around lambda0")
    _add_common(p)
    p.set_defaults(fn=cmd_lambda_sweep)

    p = sub.add_parser("diagnostics", help="Monte-Carlo operator bound checks")
    _add_common(p)
    p.set_defaults(fn=cmd_diagnostics)

    p = sub.add_parser("lambda0", help="print lambda0 and the rule subsample size")
    _add_common(p)
    p.add_argument("--n", type=int, required=True, help="sample size")
    p.set_defaults(fn=cmd_lambda0)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except (ValueError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
