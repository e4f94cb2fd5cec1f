"""`figures` command line: sparsity and traversal renderers."""

from __future__ import annotations

import argparse
import sys

from .errors import FigureError
from .sparsity import plot_sparsity
from .traversal import plot_traversal


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="figures",
                                     description="render evaluation CSVs as images")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sparsity", help="signal-vs-noise bars per latent dimension")
    p.add_argument("csv")
    p.add_argument("-o", "--out", required=True)
    p.add_argument("--dpi", type=int, default=120)
    p.add_argument("--title")
    p.add_argument("--d-z0", type=int, dest="d_z0",
                   help="property-block size when the CSV lacks a subspace column")
    p.set_defaults(func=lambda a: plot_sparsity(a.csv, a.out, dpi=a.dpi, title=a.title,
                                                d_z0=a.d_z0))

    p = sub.add_parser("traversal", help="original-space traversal curves/scatter")
    p.add_argument("csv")
    p.add_argument("-o", "--out", required=True)
    p.add_argument("--dpi", type=int, default=120)
    p.add_argument("--title")
    p.set_defaults(func=lambda a: plot_traversal(a.csv, a.out, dpi=a.dpi, title=a.title))
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        summary = args.func(args)
    except FigureError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(" ".join(f"{k}={v}" for k, v in summary.items()))
    return 0


if __name__ == "__main__":
    sys.exit(main())
