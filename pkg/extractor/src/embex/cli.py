"""Command line front end: ``embex extract``."""

import argparse
import sys
from typing import Optional, Sequence

from .extract import ExtractionJob, extract


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="embex",
        description="Extract per-instance word embeddings into a binary bundle.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    ex = sub.add_parser("extract", help="run one extraction job")
    ex.add_argument("--model", required=True, help="checkpoint id or local path")
    variant = ex.add_mutually_exclusive_group(required=True)
    variant.add_argument("--plain", action="store_true",
                         help="pool the target word's own subtokens")
    variant.add_argument("--masked", action="store_true",
                         help="replace the target span with one mask token")
    ex.add_argument("--dataset", required=True, help="annotation JSONL file")
    ex.add_argument("--out", required=True, help="bundle directory to write")
    ex.add_argument("--batch-size", type=int, default=8)
    ex.add_argument("--max-length", type=int, default=None,
                    help="skip sentences longer than this many tokens")
    ex.add_argument("--device", default="cpu")
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = _build_parser().parse_args(argv)
    job = ExtractionJob(
        model_id=args.model,
        masked=args.masked,
        dataset=args.dataset,
        out_dir=args.out,
        device=args.device,
        batch_size=args.batch_size,
        max_length=args.max_length,
    )
    try:
        result = extract(job)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    for skip in result.skipped:
        print(f"skipped {skip.instance_id}: {skip.reason}", file=sys.stderr)
    if result.skipped:
        print(f"{len(result.skipped)} skipped ids listed in "
              f"{result.bundle_dir}/skipped.txt", file=sys.stderr)
    variant = "masked" if result.masked else "plain"
    print(f"wrote {result.bundle_dir}: {result.count} {variant} vectors, dim {result.dim}")
    return 0
