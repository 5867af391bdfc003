"""Command-line front end: ``cskct <command> [options]``.

Exit status is 0 on success, 2 for configuration errors, 3 for infeasible
designs and 4 for numerical failures.
"""
from __future__ import annotations

import argparse
import logging
import sys

from .errors import ConfigError, DomainError, InfeasibleDesignError, NumericalError
from . import experiments as ex

EXIT_OK, EXIT_CONFIG, EXIT_INFEASIBLE, EXIT_NUMERICAL = 0, 2, 3, 4


def _list(cast):
    def parse(text):
        try:
            return [cast(v) for v in text.split(",") if v.strip()]
        except ValueError:
            raise argparse.ArgumentTypeError(f"bad list {text!r}") from None
    return parse


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cskct", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("-c", "--config", help="key=value configuration file")
        p.add_argument("-s", "--set", dest="overrides", action="append", default=[],
                       metavar="KEY=VALUE", help="override a configuration key (repeatable)")
        p.add_argument("-o", "--output", help="write CSV here instead of stdout")
        p.add_argument("--timestamp", action="store_true",
                       help="add a generation-time comment line to the CSV")
        return p

    p = common(sub.add_parser("design", help="release levels and thresholds"))
    p.add_argument("--csv", action="store_true", help="print CSV instead of the text report")

    p = common(sub.add_parser("gamma-sweep", help="gamma over t_sym and y_max"))
    p.add_argument("--t-sym", type=_list(float),
                   default=[round(1.28 * n, 2) for n in range(1, 26)])
    p.add_argument("--y-max", type=_list(float), default=[17.0, 18.0, 19.0, 20.0, 21.0])

    p = common(sub.add_parser("ser", help="error probability along a parameter sweep"))
    p.add_argument("--vary", required=True, choices=sorted(ex.SWEEPABLE))
    p.add_argument("--values", required=True, type=_list(str))
    p.add_argument("--montecarlo", action="store_true", help="add simulated SER columns")

    p = common(sub.add_parser("complexity", help="threshold and CIR counts versus K"))
    p.add_argument("--K", dest="Ks", type=_list(int), default=list(range(1, 101)))
    p.add_argument("--M", dest="Ms", type=_list(int), default=[2, 4])

    p = common(sub.add_parser("montecarlo", help="simulate one configuration"))
    p.add_argument("--workers", type=int, help="worker threads (results do not depend on it)")

    common(sub.add_parser("cir-dump", help="per-transmitter and averaged CIR table"))
    return parser


def _emit(text: str, path: str | None) -> None:
    if path:
        with open(path, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = ex.load_config(args.config, args.overrides)
        ts = args.timestamp
        if args.command == "design":
            report, table = ex.cmd_design(cfg, ts)
            if args.output:
                _emit(table, args.output)
            sys.stdout.write(table if args.csv and not args.output else report)
        elif args.command == "gamma-sweep":
            _emit(ex.cmd_gamma_sweep(args.t_sym, args.y_max, cfg, ts), args.output)
        elif args.command == "ser":
            spec = ex.SweepSpec(args.vary, tuple(args.values), cfg)
            _emit(ex.cmd_ser(spec, args.montecarlo, ts), args.output)
        elif args.command == "complexity":
            _emit(ex.cmd_complexity(args.Ks, args.Ms, ts), args.output)
        elif args.command == "montecarlo":
            _emit(ex.cmd_montecarlo(cfg, args.workers, ts), args.output)
        elif args.command == "cir-dump":
            _emit(ex.cmd_cir_dump(cfg, ts), args.output)
    except InfeasibleDesignError as exc:
        print(f"cskct: infeasible design: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (ConfigError, DomainError) as exc:
        print(f"cskct: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NumericalError, ArithmeticError) as exc:
        print(f"cskct: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
