"""Command-line entry point for batch scoring request files."""

from __future__ import annotations

import argparse
import logging
import sys

from .adapter import DEFAULT_MODEL, AdapterConfig, RequestError, score_requests


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="t5-adapter",
        description="Score ranking requests with a seq2seq relevance checkpoint.",
    )
    parser.add_argument("--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("score", help="score a request file into a run file")
    p.add_argument("--requests", required=True, help="JSONL scoring requests")
    p.add_argument("--model", default=DEFAULT_MODEL)
    p.add_argument("--batch-size", type=int, default=16)
    p.add_argument("--device", default="cpu")
    p.add_argument("--max-tokens", type=int, default=512,
                   help="subword limit for the whole model input")
    p.add_argument("--tag", default=None, help="run tag (defaults to the model name)")
    p.add_argument("--out", required=True)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    config = AdapterConfig(
        model_id=args.model,
        batch_size=args.batch_size,
        device=args.device,
        max_input_tokens=args.max_tokens,
        tag=args.tag,
    )
    try:
        count = score_requests(args.requests, args.out, config)
    except RequestError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 4
    except RuntimeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 5
    print(f"scored {count} requests to {args.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
