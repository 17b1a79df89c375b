"""HTTP service exposing the attention exporter over the scorer wire protocol.

POST /v1/score
    {"protocol_version": "1", "encoding": "utf-8", "question": str,
     "chunks": [str, ...], "options": {...}}
->  {"protocol_version": "1", "encoding": "utf-8",
     "per_chunk": [[{"start", "end", "score"}, ...], ...],
     "backend_meta": {...}}

Offsets are zero-based byte offsets into each chunk's utf-8 text; scores are
64-bit floats. Malformed requests get a 400 protocol-error response and the
connection stays alive. /healthz and /version report liveness and identity.
"""

from __future__ import annotations

import logging
import time

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field

from .model import AttentionExporter

PROTOCOL_VERSION = "1"
WIRE_ENCODING = "utf-8"

log = logging.getLogger("fidattn")


class ScoreBody(BaseModel):
    protocol_version: str = Field(default=PROTOCOL_VERSION)
    encoding: str = Field(default=WIRE_ENCODING)
    question: str = ""
    chunks: list[str]
    options: dict = Field(default_factory=dict)


def protocol_error(message: str, status: int = 400) -> JSONResponse:
    return JSONResponse({"error": message, "kind": "protocol"}, status_code=status)


def create_app(exporter: AttentionExporter) -> FastAPI:
    app = FastAPI(title="fidattn", docs_url=None, redoc_url=None)

    @app.get("/healthz")
    def healthz():
        return {"status": "ok"}

    @app.get("/version")
    def version():
        return {
            "protocol_version": PROTOCOL_VERSION,
            "encoding": WIRE_ENCODING,
            "checkpoint": exporter.checkpoint,
            "layers": exporter.layers,
            "heads": exporter.heads,
            "max_source_tokens": exporter.max_source_tokens,
            "max_chunks": exporter.max_chunks,
        }

    @app.post("/v1/score")
    def score(body: ScoreBody, request: Request):
        if body.protocol_version != PROTOCOL_VERSION:
            return protocol_error(
                f"protocol version mismatch: got {body.protocol_version!r}, "
                f"serving {PROTOCOL_VERSION!r}"
            )
        if body.encoding.lower() != WIRE_ENCODING:
            return protocol_error(f"unsupported encoding {body.encoding!r}")
        if not body.chunks:
            return protocol_error("request has no chunks")
        if any(not c for c in body.chunks):
            return protocol_error("empty chunk text")
        if len(body.chunks) > exporter.max_chunks:
            return protocol_error(
                f"{len(body.chunks)} chunks exceeds the exporter cap of "
                f"{exporter.max_chunks}; split the request",
                status=413,
            )
        t0 = time.perf_counter()
        per_chunk, meta = exporter.score_chunks(
            body.question, body.chunks, debug_raw=bool(body.options.get("debug_raw"))
        )
        elapsed_ms = (time.perf_counter() - t0) * 1e3
        log.info(
            "scored chunks=%d question_chars=%d seq_len=%s elapsed_ms=%.1f",
            len(body.chunks),
            len(body.question),
            meta.get("sequence_length"),
            elapsed_ms,
        )
        return {
            "protocol_version": PROTOCOL_VERSION,
            "encoding": WIRE_ENCODING,
            "per_chunk": per_chunk,
            "backend_meta": {**meta, "inference_ms": elapsed_ms},
        }

    return app
