"""Scorer gateway: uniform interface over token-importance backends.

Backends return one ``ScoredSpan`` list per chunk. Spans are character
offsets into the chunk text only; the question prefix and special tokens
never appear, so downstream pooling is over context tokens by construction.
Downstream selection depends only on score order and ratios, so backend
score scale is irrelevant.
"""

from __future__ import annotations

import math
import string
import threading
from collections import OrderedDict
from dataclasses import dataclass, field
from typing import Mapping, Protocol, Sequence

from .errors import ConfigurationError, ValidationError
from .model import ScoredSpan
from .tokenization import WhitespaceCounter

_ws = WhitespaceCounter()
_PUNCT = string.punctuation


@dataclass(frozen=True)
class ScoreRequest:
    question: str
    chunks: tuple[str, ...]
    backend: str = "uniform"
    options: Mapping[str, object] = field(default_factory=dict)

    def __post_init__(self):
        if not self.chunks:
            raise ValidationError("score request has no chunks")
        for i, c in enumerate(self.chunks):
            if not c:
                raise ValidationError(f"chunk {i} is empty")


@dataclass(frozen=True)
class ScoreResponse:
    per_chunk: tuple[tuple[ScoredSpan, ...], ...]
    backend_meta: Mapping[str, object] = field(default_factory=dict)


class Scorer(Protocol):
    name: str

    def score_chunks(
        self, question: str, chunks: Sequence[str], options: Mapping[str, object]
    ) -> tuple[list[list[ScoredSpan]], dict]: ...


def validate_spans(chunk_text: str, spans: Sequence[ScoredSpan], chunk_index: int) -> None:
    """Enforce the span contract: in-range, sorted, non-overlapping, scores >= 0."""
    prev_end = 0
    for s in spans:
        if s.char_start < 0 or s.char_end > len(chunk_text):
            raise ValidationError(
                f"chunk {chunk_index}: span [{s.char_start}, {s.char_end}) outside "
                f"text of length {len(chunk_text)}"
            )
        if s.char_start < prev_end:
            raise ValidationError(
                f"chunk {chunk_index}: spans overlap or are unsorted at {s.char_start}"
            )
        if not math.isfinite(s.score) or s.score < 0:
            raise ValidationError(f"chunk {chunk_index}: bad score {s.score!r}")
        prev_end = s.char_end


def validate_response(request: ScoreRequest, response: ScoreResponse) -> None:
    if len(response.per_chunk) != len(request.chunks):
        raise ValidationError(
            f"response has {len(response.per_chunk)} chunks, request had "
            f"{len(request.chunks)}"
        )
    for i, (text, spans) in enumerate(zip(request.chunks, response.per_chunk)):
        validate_spans(text, spans, i)


class UniformScorer:
    """Every whitespace token scores 1.0. Offline fallback and test oracle."""

    name = "uniform"

    def score_chunks(self, question, chunks, options):
        per_chunk = [
            [ScoredSpan(a, b, 1.0) for a, b in _ws.spans(text)] for text in chunks
        ]
        return per_chunk, {"backend": self.name}


def _norm_term(token: str) -> str:
    return token.strip(_PUNCT).lower()


class LexicalScorer:
    """Exact-overlap scorer: a token scores 1.0 iff it matches a question term.

    Matching is case-insensitive with surrounding punctuation stripped.
    With an empty question every token scores 0.
    """

    name = "lexical"

    def score_chunks(self, question, chunks, options):
        terms = {t for t in (_norm_term(w) for w in question.split()) if t}
        per_chunk = []
        for text in chunks:
            spans = [
                ScoredSpan(a, b, 1.0 if _norm_term(text[a:b]) in terms else 0.0)
                for a, b in _ws.spans(text)
            ]
            per_chunk.append(spans)
        return per_chunk, {"backend": self.name, "terms": sorted(terms)}


class ScorerGateway:
    """Dispatches score requests to registered backends, with optional caching.

    Safe for concurrent use; per-request state is isolated. The cache is
    keyed by (backend identity, question, chunk text) where the backend
    identity includes the checkpoint id when the backend reports one.
    """

    def __init__(self, extra_backends: Mapping[str, Scorer] | None = None, cache_size: int = 0):
        self._backends: dict[str, Scorer] = {
            "uniform": UniformScorer(),
            "lexical": LexicalScorer(),
        }
        if extra_backends:
            self._backends.update(extra_backends)
        self._cache_size = cache_size
        self._cache: OrderedDict[tuple, tuple[ScoredSpan, ...]] = OrderedDict()
        self._lock = threading.Lock()

    def register(self, scorer: Scorer) -> None:
        self._backends[scorer.name] = scorer

    def backend(self, name: str) -> Scorer:
        if name not in self._backends:
            raise ConfigurationError(
                f"unknown scorer backend {name!r}; registered: {sorted(self._backends)}"
            )
        return self._backends[name]

    def _cache_get(self, key):
        with self._lock:
            if key in self._cache:
                self._cache.move_to_end(key)
                return self._cache[key]
        return None

    def _cache_put(self, key, value):
        with self._lock:
            self._cache[key] = value
            while len(self._cache) > self._cache_size:
                self._cache.popitem(last=False)

    def score(self, request: ScoreRequest) -> ScoreResponse:
        scorer = self.backend(request.backend)
        identity = getattr(scorer, "identity", scorer.name)

        cached: dict[int, tuple[ScoredSpan, ...]] = {}
        missing: list[int] = []
        if self._cache_size > 0:
            for i, text in enumerate(request.chunks):
                hit = self._cache_get((identity, request.question, text))
                if hit is not None:
                    cached[i] = hit
                else:
                    missing.append(i)
        else:
            missing = list(range(len(request.chunks)))

        meta: dict = {"backend": request.backend, "cached": not missing}
        if missing:
            texts = [request.chunks[i] for i in missing]
            fresh, meta = scorer.score_chunks(request.question, texts, request.options)
            if len(fresh) != len(texts):
                raise ValidationError(
                    f"backend {request.backend!r} returned {len(fresh)} chunk results "
                    f"for {len(texts)} chunks"
                )
            for i, spans in zip(missing, fresh):
                cached[i] = tuple(spans)
                if self._cache_size > 0:
                    self._cache_put((identity, request.question, request.chunks[i]), tuple(spans))

        response = ScoreResponse(
            per_chunk=tuple(cached[i] for i in range(len(request.chunks))),
            backend_meta=meta,
        )
        validate_response(request, response)
        return response
