"""Command-line interface: ``sps-fdia run|analytic|sweep|validate``.

Exit status is 0 on success, 1 for a bad scenario file and 2 for a
numerical failure during the run.
"""
from __future__ import annotations

import argparse
import sys

import yaml

from . import __version__
from .errors import (DegenerateEigenvalue, InvalidVoltage, NoConvergence, NonfiniteState, NonpositiveVdc,
                     OverlappingAttacks, ParseError, UnstableAmplification, ValidationError)
from .runner import SUMMARY_FIELDS, run, run_analytic, sweep
from .scenario import load_scenario

EXIT_OK, EXIT_SCENARIO, EXIT_NUMERIC = 0, 1, 2
_NUMERIC = (NonpositiveVdc, NonfiniteState, NoConvergence, DegenerateEigenvalue, UnstableAmplification,
            InvalidVoltage)
_SCENARIO = (ParseError, ValidationError, OverlappingAttacks, FileNotFoundError, IsADirectoryError)


def _parse_values(text: str):
    """Comma-separated sweep values; YAML scalars, so numbers stay numbers."""
    out = []
    for item in text.split(","):
        item = item.strip()
        if item:
            out.append(yaml.safe_load(item))
    if not out:
        raise argparse.ArgumentTypeError("--values needs at least one value")
    return out


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="sps-fdia", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("file", help="scenario file")
    common.add_argument("--out-dir", default=".", help="directory for emitted files (default: .)")
    common.add_argument("--seed", type=int, default=None, help="reserved; runs are deterministic")
    common.add_argument("--format", choices=("csv",), default="csv", help="output format")
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("run", parents=[common], help="simulate and evaluate relays")
    sub.add_parser("analytic", parents=[common], help="closed-form rotor trajectories only")
    sw = sub.add_parser("sweep", parents=[common], help="one summary row per parameter value")
    sw.add_argument("--param", required=True, help="key path, e.g. attacks[0].gamma")
    sw.add_argument("--values", required=True, type=_parse_values, help="comma-separated values")
    sw.add_argument("--workers", type=int, default=1, help="parallel processes (default 1)")
    sub.add_parser("validate", parents=[common], help="parse and validate only")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        sc = load_scenario(args.file)
        if args.command == "validate":
            print(f"{args.file}: ok ({sc.name})")
            return EXIT_OK
        if args.command == "run":
            report = run(sc, args.out_dir)
            for key in SUMMARY_FIELDS:
                print(f"{key}: {report.summary[key]}")
            for event in report.trips:
                print(f"trip {event.relay.value} target={event.target} t={event.t_trip:.6g} "
                      f"value={event.value:.6g} threshold={event.threshold:.6g}")
            for path in report.paths.values():
                print(f"wrote {path}")
        elif args.command == "analytic":
            print(f"wrote {run_analytic(sc, args.out_dir)}")
        elif args.command == "sweep":
            rows = sweep(sc, args.param, args.values, args.out_dir, workers=args.workers)
            for row in rows:
                print(f"{args.param}={row['value']}: trips={row['trip_count']} "
                      f"success={row['attack_success']} max|dw|={row['max_abs_delta_omega']:.6g}")
    except _SCENARIO as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SCENARIO
    except _NUMERIC as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK


if __name__ == "__main__":
    raise SystemExit(main())
