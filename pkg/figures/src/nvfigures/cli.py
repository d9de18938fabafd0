"""Command-line entry point: render --csv <path> --figure fig2 --out <path>."""

import argparse
import sys

from .errors import FigureError
from .render import FIGURES, FigureSpec, render


def build_parser():
    ap = argparse.ArgumentParser(
        prog="render",
        description="Render a figure analogue from an nvspin sweep CSV.")
    ap.add_argument("--csv", required=True, help="input sweep CSV")
    ap.add_argument("--figure", required=True, choices=sorted(FIGURES),
                    help="figure id")
    ap.add_argument("--out", required=True,
                    help="output image path (.png or .svg)")
    return ap


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        render(FigureSpec(csv=args.csv, figure=args.figure, out=args.out))
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except FigureError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
