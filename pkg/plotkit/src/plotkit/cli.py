"""Command line entry point: plot --kind K --in DIR --out FILE."""

from __future__ import annotations

import argparse
import sys

from .figures import KINDS, PlotJob, render
from .io import SchemaError


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="plot",
        description="Render a figure from a capspectra sweep directory.")
    p.add_argument("--kind", required=True, choices=KINDS)
    p.add_argument("--in", dest="input_dir", required=True,
                   help="run or sweep directory")
    p.add_argument("--out", dest="out_path", required=True,
                   help="output image path")
    p.add_argument("--column", default="dP2_dE",
                   choices=("dP2_dE", "dP1_dE"),
                   help="spectrum column for overlay/semilog")
    p.add_argument("--logx", action="store_true",
                   help="logarithmic energy axis for overlay/semilog")
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    job = PlotJob(kind=args.kind, input_dir=args.input_dir,
                  out_path=args.out_path, column=args.column,
                  logx=args.logx)
    try:
        stats = render(job)
    except SchemaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    note = ""
    if stats.get("omitted_negative"):
        total = sum(stats["omitted_negative"].values())
        if total:
            note = f" ({total} negative samples omitted)"
    print(f"wrote {stats['out']}: {stats['curves']} curve(s){note}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
