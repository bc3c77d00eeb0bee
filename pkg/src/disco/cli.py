"""Command-line interface.

Exit codes: 0 success, 1 usage error, 2 data error, 3 model or design error.
"""

from __future__ import annotations

import argparse
import sys
import warnings

from .errors import DataError, DomainError, ModelError
from .factorial import multiway_disco, parse_formula
from .inference import (
    DEFAULT_REPLICATES,
    cell_mean_residuals,
    conservative_critical_value,
    disco_test,
)
from .io import load_csv, render_disco_table
from .simulation import PowerConfig, PowerResult, estimate_power

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_MODEL = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _uint64(text):
    try:
        value = int(text, 10)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a decimal integer: {text!r}") from None
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError(f"seed must be an unsigned 64-bit integer: {text}")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="disco", description="Distance components (DISCO) analysis.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def data_args(p):
        p.add_argument("--data", required=True, help="CSV file with a header row")
        p.add_argument("--formula", required=True, help='model formula, e.g. "y1,y2 ~ A*B"')
        p.add_argument("--index", type=float, default=1.0, help="exponent on distances, in (0, 2]")

    t = sub.add_parser("test", help="decomposition with permutation p-values")
    data_args(t)
    t.add_argument("--replicates", type=int, default=DEFAULT_REPLICATES)
    t.add_argument("--seed", type=_uint64, default=None)
    t.add_argument("--residuals", action="store_true",
                   help="analyse residuals from the cell means of the single factor")
    t.add_argument("--conservative", action="store_true",
                   help="also print asymptotic conservative critical values")

    d = sub.add_parser("decompose", help="decomposition table only")
    data_args(d)
    d.add_argument("--residuals", action="store_true")

    pw = sub.add_parser("power", help="Monte Carlo power estimate, printed as CSV")
    pw.add_argument("--alternative", choices=["t", "gamma", "normal"], required=True)
    pw.add_argument("--param", type=float, required=True,
                    help="noncentrality (t), lognormal sigma (gamma) or scale (normal) of group 1")
    pw.add_argument("--dim", type=int, required=True)
    pw.add_argument("--groups", type=int, default=4)
    pw.add_argument("--n", type=int, default=30)
    pw.add_argument("--trials", type=int, required=True)
    pw.add_argument("--level", type=float, default=0.10)
    pw.add_argument("--replicates", type=int, default=199)
    pw.add_argument("--index", type=float, default=1.0)
    pw.add_argument("--seed", type=_uint64, default=0)
    pw.add_argument("--header", action="store_true", help="print a CSV header line first")
    return parser


def _load(args):
    formula = parse_formula(args.formula)
    data = load_csv(args.data, formula.response, formula.factors)
    if args.residuals:
        if len(formula.terms) != 1 or len(formula.terms[0]) != 1:
            raise ModelError("--residuals needs a model with exactly one factor")
        y, factors = data.bind(formula)
        res = cell_mean_residuals(y, factors[formula.terms[0][0]])
        for j, name in enumerate(formula.response):
            data = data.with_response(name, res[:, j])
    return formula, data


def _run(args, out) -> None:
    if args.command == "power":
        config = PowerConfig(
            alternative=args.alternative, param=args.param, dim=args.dim, groups=args.groups,
            n=args.n, level=args.level, replicates=args.replicates, trials=args.trials,
            seed=args.seed, index=args.index,
        )
        result = estimate_power(config)
        if args.header:
            out.write(PowerResult.csv_header() + "\n")
        out.write(result.csv_row() + "\n")
        return

    formula, data = _load(args)
    if args.command == "decompose":
        y, factors = data.bind(formula)
        table = multiway_disco(y, factors, formula, args.index)
        out.write(render_disco_table(table))
        return

    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        table, _ = disco_test(data, formula, args.index, args.replicates, args.seed)
    for w in caught:
        print(f"warning: {w.message}", file=sys.stderr)
    out.write(render_disco_table(table))
    if args.conservative:
        for level in (0.05, 0.10):
            out.write(f"Conservative critical value (level {level:.2f}): "
                      f"{conservative_critical_value(level):.5f}\n")


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        _run(args, sys.stdout)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except DomainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except ModelError as exc:
        print(f"model error: {exc}", file=sys.stderr)
        return EXIT_MODEL
    return EXIT_OK


def run_cli(argv) -> int:
    return main(argv)


if __name__ == "__main__":
    sys.exit(main())
