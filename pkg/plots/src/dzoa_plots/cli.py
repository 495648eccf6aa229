"""Command-line front end: render figures from experiment CSVs."""

from __future__ import annotations

import argparse
import json
import sys

from .errors import SchemaError
from .figures import TRADEOFF_AXES, plot_convergence, plot_tradeoff


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dzoa-plots",
        description="Render convergence and privacy-accuracy figures "
                    "from experiment CSV outputs (PNG or SVG).",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    conv = sub.add_parser(
        "convergence", help="mean normalized error vs outer iteration"
    )
    conv.add_argument("--in", dest="inputs", nargs="+", required=True,
                      metavar="CSV", help="run-trace CSV files (one per run)")
    conv.add_argument("--out", required=True, metavar="IMG",
                      help="output image path (.png or .svg)")

    trade = sub.add_parser(
        "tradeoff", help="final error vs privacy budget or vs delta"
    )
    trade.add_argument("--in", dest="inputs", nargs=1, required=True,
                       metavar="CSV", help="aggregate sweep CSV file")
    trade.add_argument("--axis", choices=TRADEOFF_AXES, default="epsilon-bar",
                       help="x axis (default: epsilon-bar)")
    trade.add_argument("--out", required=True, metavar="IMG",
                       help="output image path (.png or .svg)")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "convergence":
            out = plot_convergence(args.inputs, args.out)
        else:
            out = plot_tradeoff(args.inputs[0], args.axis, args.out)
    except SchemaError as exc:
        payload = {"type": type(exc).__name__, "message": str(exc)}
        print("error " + json.dumps(payload, sort_keys=True), file=sys.stderr)
        return 1
    print(out)
    return 0


if __name__ == "__main__":
    sys.exit(main())
