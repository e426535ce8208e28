"""Command-line wrapper: graph file in, embedding file out.

Exit codes: 0 success, 1 domain errors (unreadable graph structure,
model load failure), 2 I/O or usage errors.
"""

from __future__ import annotations

import argparse
import logging
import sys

from .encoders import ModelLoadError
from .extract import ExtractorConfig, GraphReadError, extract

EXIT_OK = 0
EXIT_DOMAIN = 1
EXIT_USAGE = 2


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="skillgraph-extract",
        description="Pool transformer hidden states over a graph's node texts "
        "into an embedding file",
    )
    p.add_argument("--graph", required=True, help="graph JSON path")
    p.add_argument(
        "--model",
        required=True,
        help='model name, or "stub" / "stub:<width>" for the offline encoder',
    )
    p.add_argument("--out", required=True, help="embedding file to write")
    p.add_argument("--max-length", type=int, default=128, help="token truncation length")
    p.add_argument("--batch-size", type=int, default=32)
    p.add_argument(
        "--exclude-special-tokens",
        action="store_true",
        help="drop sequence delimiter tokens from the mean",
    )
    return p


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(stream=sys.stderr, level=logging.WARNING, format="%(message)s")
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code in (0, None) else EXIT_USAGE
    try:
        cfg = ExtractorConfig(
            model=args.model,
            output=args.out,
            max_length=args.max_length,
            batch_size=args.batch_size,
            include_special_tokens=not args.exclude_special_tokens,
        )
        out = extract(args.graph, cfg)
    except (GraphReadError, ModelLoadError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except (FileNotFoundError, OSError) as exc:
        print(f"file error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ValueError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    with out.open(encoding="utf-8") as fh:
        header = fh.readline().strip()
        rows = sum(1 for _ in fh)
    print(f"wrote {out} ({rows} rows, {header})")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
