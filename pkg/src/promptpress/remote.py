"""HTTP client for a remote attention-score exporter.

Wire protocol (shared with the exporter service):

POST <endpoint>/v1/score
    {"protocol_version": "1", "encoding": "utf-8", "question": str,
     "chunks": [str, ...], "options": {...}}
->  {"protocol_version": "1", "encoding": "utf-8",
     "per_chunk": [[{"start": int, "end": int, "score": float}, ...], ...],
     "backend_meta": {...}}

Offsets on the wire are zero-based byte offsets into the chunk text in the
declared encoding; scores are 64-bit floats. A protocol-version or
chunk-count mismatch is a hard protocol error. Transport failures are
retried and then surfaced with retry metadata.
"""

from __future__ import annotations

import math
import threading
import time
from typing import Mapping, Sequence

import requests

from .errors import ProtocolError, TransportError, ValidationError
from .model import ScoredSpan

PROTOCOL_VERSION = "1"
WIRE_ENCODING = "utf-8"
SCORE_PATH = "/v1/score"


def byte_to_char_map(text: str, encoding: str = WIRE_ENCODING) -> list[int]:
    """Map byte offset -> char offset; index len(bytes) maps to len(text)."""
    mapping: list[int] = []
    for ci, ch in enumerate(text):
        mapping.extend([ci] * len(ch.encode(encoding)))
    mapping.append(len(text))
    return mapping


class RemoteScorer:
    """Scorer backend speaking the exporter wire protocol.

    Requests may be split into sub-batches transparently; chunk results are
    reassembled in request order. In-flight requests are bounded by
    ``max_in_flight`` so concurrent evaluation jobs cannot stampede the
    exporter.
    """

    name = "remote"

    def __init__(
        self,
        endpoint: str,
        timeout: float = 60.0,
        retries: int = 2,
        backoff_s: float = 0.2,
        max_chunks_per_request: int = 32,
        max_in_flight: int = 4,
        session: requests.Session | None = None,
    ):
        self.endpoint = endpoint.rstrip("/")
        self.identity = f"remote:{self.endpoint}"
        self.timeout = timeout
        self.retries = retries
        self.backoff_s = backoff_s
        self.max_chunks_per_request = max_chunks_per_request
        self._session = session or requests.Session()
        self._in_flight = threading.Semaphore(max_in_flight)

    def _post(self, body: dict) -> dict:
        url = self.endpoint + SCORE_PATH
        attempts = 0
        last_exc: Exception | None = None
        while attempts <= self.retries:
            attempts += 1
            try:
                with self._in_flight:
                    resp = self._session.post(url, json=body, timeout=self.timeout)
            except requests.RequestException as exc:
                last_exc = exc
                if attempts <= self.retries:
                    time.sleep(self.backoff_s * attempts)
                continue
            if resp.status_code >= 500:
                last_exc = RuntimeError(f"server error {resp.status_code}")
                if attempts <= self.retries:
                    time.sleep(self.backoff_s * attempts)
                continue
            if resp.status_code != 200:
                raise ProtocolError(
                    f"scorer endpoint returned {resp.status_code}: {resp.text[:200]}"
                )
            return resp.json()
        raise TransportError(
            f"scorer endpoint unreachable after {attempts} attempts: {last_exc}",
            endpoint=url,
            attempts=attempts,
        )

    def _score_batch(
        self, question: str, chunks: Sequence[str], options: Mapping[str, object]
    ) -> tuple[list[list[ScoredSpan]], dict]:
        payload = self._post(
            {
                "protocol_version": PROTOCOL_VERSION,
                "encoding": WIRE_ENCODING,
                "question": question,
                "chunks": list(chunks),
                "options": dict(options),
            }
        )
        version = payload.get("protocol_version")
        if version != PROTOCOL_VERSION:
            raise ProtocolError(
                f"protocol version mismatch: got {version!r}, expected {PROTOCOL_VERSION!r}"
            )
        encoding = payload.get("encoding", WIRE_ENCODING)
        per_chunk_raw = payload.get("per_chunk")
        if not isinstance(per_chunk_raw, list) or len(per_chunk_raw) != len(chunks):
            got = len(per_chunk_raw) if isinstance(per_chunk_raw, list) else "none"
            raise ProtocolError(
                f"chunk count mismatch: response has {got}, request had {len(chunks)}"
            )
        per_chunk: list[list[ScoredSpan]] = []
        for text, raw_spans in zip(chunks, per_chunk_raw):
            b2c = byte_to_char_map(text, encoding)
            spans = []
            for raw in raw_spans:
                score = raw["score"]
                if not isinstance(score, (int, float)) or not math.isfinite(score) or score < 0:
                    raise ValidationError(f"remote span score invalid: {score!r}")
                start, end = raw["start"], raw["end"]
                if not 0 <= start < end <= len(b2c) - 1:
                    raise ValidationError(
                        f"remote span byte range [{start}, {end}) outside chunk"
                    )
                spans.append(ScoredSpan(b2c[start], b2c[end - 1] + 1, float(score)))
            per_chunk.append(spans)
        return per_chunk, dict(payload.get("backend_meta", {}))

    def score_chunks(self, question, chunks, options):
        per_chunk: list[list[ScoredSpan]] = []
        meta: dict = {}
        step = self.max_chunks_per_request
        for i in range(0, len(chunks), step):
            batch_spans, batch_meta = self._score_batch(question, chunks[i : i + step], options)
            per_chunk.extend(batch_spans)
            if not meta:
                meta = batch_meta
        meta.setdefault("backend", self.name)
        meta["endpoint"] = self.endpoint
        return per_chunk, meta
