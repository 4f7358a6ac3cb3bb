"""CLI: render one figure from a harness CSV.

    ris-crs-plot --csv snr.csv --kind fig3 --out fig3.png
"""

from __future__ import annotations

import argparse
import sys

from .render import FIGURE_AXES, PlotJob, render


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ris-crs-plot",
        description="Render a ris-crs experiment CSV as a figure")
    parser.add_argument("--csv", required=True, help="harness CSV path")
    parser.add_argument("--kind", required=True, choices=sorted(FIGURE_AXES),
                        help="which figure analogue to draw")
    parser.add_argument("--out", required=True, help="output image path")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        out = render(PlotJob(csv_path=args.csv, figure_kind=args.kind,
                             out_image_path=args.out))
    except Exception as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(f"wrote {out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
