"""Command line entry: plot --kind <k> --in <csv> --out <png>."""

from __future__ import annotations

import argparse
import sys

from .render import FIGURE_KINDS, PlotSpec, render


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="plot")
    parser.add_argument("--kind", choices=FIGURE_KINDS, required=True)
    parser.add_argument("--in", dest="csv_path", required=True)
    parser.add_argument("--out", dest="out_path", required=True)
    args = parser.parse_args(argv)
    render(PlotSpec(args.csv_path, args.kind, args.out_path))
    return 0


if __name__ == "__main__":
    sys.exit(main())
