"""figkit command line: render statistic tables into figures."""

from __future__ import annotations

import argparse
import sys

from .render import KINDS, FigkitError, PlotSpec, render


def main(argv=None):
    ap = argparse.ArgumentParser(prog="figkit", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("render", help="render one figure from a table")
    p.add_argument("--kind", required=True, choices=KINDS)
    p.add_argument("--in", dest="input", required=True,
                   help="CSV from 'veerstats stats', or JSONL for family")
    p.add_argument("--out", required=True, help="output .png or .svg path")
    p.add_argument("--yscale", choices=("linear", "log"), default=None)
    p.add_argument("--bin-size", type=float, default=0.02)
    p.add_argument("--dpi", type=int, default=150)

    args = ap.parse_args(argv)
    spec = PlotSpec(input=args.input, kind=args.kind, out=args.out,
                    yscale=args.yscale, bin_size=args.bin_size,
                    dpi=args.dpi)
    try:
        render(spec)
    except FigkitError as err:
        print("error: %s: %s" % (type(err).__name__, err), file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
