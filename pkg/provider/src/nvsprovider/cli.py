"""`provider` command: load a neural metric and serve the jsonl-v1 protocol.

Exit status: 0 after a clean stdin-EOF shutdown; 3 when the model cannot be
initialized (reported on stderr, nothing written to stdout).
"""

from __future__ import annotations

import argparse
import sys

from .backends import build_scorer
from .config import DEVICES, METRICS, InitError, ProviderConfig
from .serve import Descriptor, serve_loop


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="provider",
        description="Score image pairs with LPIPS or DreamSim over "
                    "line-delimited JSON on stdin/stdout.")
    parser.add_argument("--metric", required=True, choices=METRICS)
    parser.add_argument("--device", default="auto", choices=DEVICES)
    parser.add_argument("--variant", default="",
                        help="model checkpoint variant; defaults to the "
                             "metric's published default")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = ProviderConfig(metric=args.metric, device=args.device,
                                model_variant=args.variant)
        scorer = build_scorer(config)
    except InitError as exc:
        print(f"provider: {exc}", file=sys.stderr)
        return 3
    serve_loop(Descriptor(name=config.handshake_name), scorer)
    return 0


if __name__ == "__main__":
    sys.exit(main())
