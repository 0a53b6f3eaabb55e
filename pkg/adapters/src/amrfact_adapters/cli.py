"""Entry point: ``amrfact-adapter BACKEND [options]``.

The backend is constructed before any protocol output, so a missing
dependency or an unloadable checkpoint exits nonzero without a
handshake line. Exit codes: 0 after stdin closes, 2 for usage errors,
3 for backend load failures.
"""
from __future__ import annotations

import argparse
import sys

from .backends import BackendError, EchoBackend, TransformersBackend
from .protocol import serve


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="amrfact-adapter",
        description="Answer amrfact-scorer/1 requests on stdin.",
    )
    backends = parser.add_subparsers(dest="backend", required=True)
    backends.add_parser(
        "echo",
        help="fixed scores for wiring tests (entailment 0.5, relevance -1.0)",
    )
    hf = backends.add_parser(
        "hf", help="score with pretrained transformers checkpoints"
    )
    hf.add_argument(
        "--nli-model",
        required=True,
        help="sequence-classification checkpoint with an 'entailment' label",
    )
    hf.add_argument(
        "--relevance-model",
        default=None,
        help="optional seq2seq checkpoint for relevance scoring",
    )
    hf.add_argument("--device", default="cpu")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.backend == "echo":
            backend = EchoBackend()
        else:
            backend = TransformersBackend(
                args.nli_model, args.relevance_model, args.device
            )
    except BackendError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    return serve(backend, sys.stdin, sys.stdout, sys.stderr)
