"""Batch figure generation: flags mirror the plot spec one-to-one."""

from __future__ import annotations

import argparse
import sys

from .render import PlotSpec, SchemaError, render


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="reportplots",
        description="Render decay, martingale, and z-table figures from "
        "slerho experiment CSVs.",
    )
    parser.add_argument("--kind", required=True, choices=("decay", "martingale", "ztable"),
                        help="which documented CSV schema/figure to produce")
    parser.add_argument("--csv", required=True, nargs="+", help="input CSV path(s)")
    parser.add_argument("--out", required=True, help="output image path (png)")
    parser.add_argument("--caption", default="",
                        help="caption template; {config_hash} expands to the data hash")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        spec = PlotSpec(csv_paths=args.csv, kind=args.kind, out_path=args.out, caption=args.caption)
        result = render(spec)
    except SchemaError as err:
        print(f"schema error: {err}", file=sys.stderr)
        return 2
    except OSError as err:
        print(f"io error: {err}", file=sys.stderr)
        return 2
    print(result.out_path)
    print(result.annotation)
    return 0


if __name__ == "__main__":
    sys.exit(main())
