"""Command-line entry point: plotkit <kind> --in <csv> --out <img>."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .render import PLOT_KINDS, PlotSchemaError, PlotSpec, render


def _parse_filter(text: str) -> tuple[str, str]:
    if "=" not in text:
        raise argparse.ArgumentTypeError(f"filter must be key=value: {text!r}")
    key, _, value = text.partition("=")
    return key.strip(), value.strip()


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="plotkit",
        description="Render figures from qrmux sweep result CSVs")
    parser.add_argument("kind", choices=PLOT_KINDS)
    parser.add_argument("--in", dest="input_csv", type=Path, required=True,
                        help="trials.csv (most kinds) or ratio_pairs.csv "
                             "(ratio_scatter)")
    parser.add_argument("--out", type=Path, required=True,
                        help="output image path (.png or .svg)")
    parser.add_argument("--filter", type=_parse_filter, action="append",
                        default=[], metavar="KEY=VALUE",
                        help="restrict rows, e.g. --filter V=25 --filter tau=1")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    spec = PlotSpec(kind=args.kind, input_csv=args.input_csv, output_path=args.out,
                    filters=dict(args.filter))
    try:
        path = render(spec)
    except (PlotSchemaError, FileNotFoundError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
