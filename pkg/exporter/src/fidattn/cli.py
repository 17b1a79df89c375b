"""Service launcher: ``fidattn serve --checkpoint tiny:0 --port 8123``.

Flags fall back to FIDATTN_CHECKPOINT / FIDATTN_DEVICE / FIDATTN_PORT
environment variables.
"""

from __future__ import annotations

import argparse
import logging
import os


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fidattn")
    sub = parser.add_subparsers(dest="command", required=True)
    serve = sub.add_parser("serve", help="run the scoring service")
    serve.add_argument(
        "--checkpoint",
        default=os.environ.get("FIDATTN_CHECKPOINT", "tiny:0"),
        help="model directory, or tiny:<seed> for the random debug model",
    )
    serve.add_argument("--device", default=os.environ.get("FIDATTN_DEVICE", "cpu"))
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--port", type=int, default=int(os.environ.get("FIDATTN_PORT", "8123")))
    serve.add_argument("--max-source-tokens", type=int, default=192)
    serve.add_argument("--max-chunks", type=int, default=64)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO, format="%(asctime)s %(name)s %(levelname)s %(message)s"
    )
    import uvicorn

    from .model import AttentionExporter
    from .service import create_app

    exporter = AttentionExporter(
        checkpoint=args.checkpoint,
        device=args.device,
        max_source_tokens=args.max_source_tokens,
        max_chunks=args.max_chunks,
    )
    app = create_app(exporter)
    uvicorn.run(app, host=args.host, port=args.port, log_level="info")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
