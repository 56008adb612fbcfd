"""One console entry point per figure kind: --in CSV [CSV ...] --out PATH."""

from __future__ import annotations

import argparse
import sys

from .figures import PlotJob, render
from .io import MissingColumnError


def build_parser(kind: str) -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog=f"sbs-plot-{kind}",
        description=f"Render the {kind} figure from simulation CSV output",
    )
    parser.add_argument(
        "--in", dest="inputs", nargs="+", required=True, help="input CSV path(s)"
    )
    parser.add_argument(
        "--out", required=True, help="output image path (PNG and SVG are written)"
    )
    parser.add_argument("--title", default=None, help="optional figure title")
    if kind == "slack":
        parser.add_argument("--bins", type=int, default=20, help="histogram bins")
    return parser


def run(kind: str, argv=None) -> int:
    args = build_parser(kind).parse_args(argv)
    options = {"bins": args.bins} if kind == "slack" else {}
    try:
        job = PlotJob(
            inputs=tuple(args.inputs),
            kind=kind,
            output=args.out,
            title=args.title,
            options=options,
        )
        written = render(job)
    except (MissingColumnError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    for path in written:
        print(path)
    return 0


def main_decay(argv=None) -> int:
    return run("decay", argv)


def main_plateau(argv=None) -> int:
    return run("plateau", argv)


def main_overlap(argv=None) -> int:
    return run("overlap", argv)


def main_slack(argv=None) -> int:
    return run("slack", argv)
