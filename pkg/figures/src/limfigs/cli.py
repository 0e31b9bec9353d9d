"""Command-line interface: limfigs render --kind mse|vif --in summary.csv --out fig.png."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .render import EmptyInput, PanelSpec, SchemaMismatch, render


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="limfigs", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    rend = sub.add_parser("render", help="render one figure kind from a summary CSV")
    rend.add_argument("--kind", choices=("mse", "vif"), required=True)
    rend.add_argument("--in", dest="input_path", type=Path, required=True)
    rend.add_argument("--out", type=Path, required=True)
    rend.add_argument("--dump-structure", type=Path)
    rend.add_argument(
        "--metric",
        choices=("mean_mse", "median_mse"),
        default="mean_mse",
        help="y metric for the mse kind",
    )
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    spec = PanelSpec(
        input_path=args.input_path,
        kind=args.kind,
        output_path=args.out,
        dump_structure_path=args.dump_structure,
        metric=args.metric,
    )
    try:
        structure = render(spec)
    except (SchemaMismatch, EmptyInput) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(f"wrote {args.out} ({len(structure['panels'])} panels)")
    return 0


if __name__ == "__main__":
    sys.exit(main())
