"""Command-line interface.

    emaclab run <config-file>
    emaclab preset <name> [--override key=value ...] [--dry-run]
    emaclab verify
    emaclab compare <csvA> <csvB> --column <name>
"""

from __future__ import annotations

import argparse
import sys

import numpy as np


def _cmd_run(args) -> int:
    from .config import parse_config
    from .runner import run

    with open(args.config) as fh:
        cfg = parse_config(fh.read())
    state = run(cfg)
    print(f"done: {cfg.problem.name} to t={state.t:g} in {state.step_index} steps "
          f"-> {cfg.outdir}")
    return 0


def _cmd_preset(args) -> int:
    from .config import format_config, preset_config
    from .runner import run

    overrides = {}
    for item in args.override or []:
        if "=" not in item:
            raise SystemExit(f"--override expects key=value, got {item!r}")
        key, value = item.split("=", 1)
        overrides[key.strip()] = value.strip()
    cfg = preset_config(args.name, overrides)
    if args.dry_run:
        sys.stdout.write(format_config(cfg))
        return 0
    state = run(cfg)
    print(f"done: preset {args.name} to t={state.t:g} in {state.step_index} steps "
          f"-> {cfg.outdir}")
    return 0


def _cmd_verify(args) -> int:
    from .verify import run_all

    return 0 if run_all() else 1


def _cmd_compare(args) -> int:
    from .output import read_csv

    a = read_csv(args.csv_a)
    b = read_csv(args.csv_b)
    for d, path in ((a, args.csv_a), (b, args.csv_b)):
        if args.column not in d:
            raise SystemExit(f"column {args.column!r} not in {path}")
    n = min(len(a[args.column]), len(b[args.column]))
    if n == 0:
        raise SystemExit("no data rows to compare")
    diff = np.abs(a[args.column][:n] - b[args.column][:n])
    k = int(np.argmax(diff))
    print(f"max |{args.column}A - {args.column}B| = {diff[k]:.17g} at t = {a['t'][k]:.17g}")
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="emaclab",
        description="2D Navier-Stokes benchmarks comparing EMAC and classical "
                    "nonlinearity forms on Taylor-Hood elements",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run a configuration file")
    p.add_argument("config")
    p.set_defaults(fn=_cmd_run)

    p = sub.add_parser("preset", help="run a named preset")
    p.add_argument("name")
    p.add_argument("--override", action="append", metavar="key=value")
    p.add_argument("--dry-run", action="store_true",
                   help="print the resolved configuration instead of running")
    p.set_defaults(fn=_cmd_preset)

    p = sub.add_parser("verify", help="run the fast invariant suite")
    p.set_defaults(fn=_cmd_verify)

    p = sub.add_parser("compare", help="max abs difference of a CSV column")
    p.add_argument("csv_a")
    p.add_argument("csv_b")
    p.add_argument("--column", required=True)
    p.set_defaults(fn=_cmd_compare)

    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except Exception as exc:
        print(f"emaclab: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
