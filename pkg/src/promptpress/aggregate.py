"""Pooling token-level scores into chunk- and sentence-level importance."""

from __future__ import annotations

from bisect import bisect_right
from dataclasses import replace
from typing import Callable, Sequence, TypeVar

from .errors import ValidationError
from .model import Chunk, ScoredSpan, require_finite_scores

U = TypeVar("U")


def pool(scores: Sequence[float], mode: str) -> float:
    """mean/max/sum pooling; an empty score list pools to 0 (lowest priority)."""
    if not scores:
        return 0.0
    if mode == "mean":
        return sum(scores) / len(scores)
    if mode == "max":
        return max(scores)
    if mode == "sum":
        return sum(scores)
    raise ValidationError(f"unknown pooling mode {mode!r}")


def aggregate_chunk_scores(
    chunks: Sequence[Chunk],
    per_chunk_spans: Sequence[Sequence[ScoredSpan]],
    pooling: str = "mean",
) -> list[Chunk]:
    """Fill chunk-level scores by pooling each chunk's span scores."""
    if len(chunks) != len(per_chunk_spans):
        raise ValidationError(
            f"{len(per_chunk_spans)} span lists for {len(chunks)} chunks"
        )
    out = []
    for chunk, spans in zip(chunks, per_chunk_spans):
        score = pool([s.score for s in spans], pooling)
        out.append(replace(chunk, score=score))
    return out


def aggregate_sentence_scores(
    chunk: Chunk, spans: Sequence[ScoredSpan], pooling: str = "mean"
) -> Chunk:
    """Fill sentence-level scores; a span belongs to the sentence containing
    its first character."""
    if not chunk.sentences:
        raise ValidationError(f"chunk {chunk.index_original} has no sentences")
    if spans and (
        min(s.char_start for s in spans) < 0
        or max(s.char_end for s in spans) > len(chunk.text)
    ):
        raise ValidationError(
            f"chunk {chunk.index_original}: span outside text of length {len(chunk.text)}"
        )
    starts = [s.char_span[0] for s in chunk.sentences]
    buckets: list[list[float]] = [[] for _ in chunk.sentences]
    for span in spans:
        si = bisect_right(starts, span.char_start) - 1
        buckets[max(si, 0)].append(span.score)
    sentences = tuple(
        replace(sent, score=pool(bucket, pooling))
        for sent, bucket in zip(chunk.sentences, buckets)
    )
    return replace(chunk, sentences=sentences)


def sort_by_importance(units: Sequence[U], original_index: Callable[[U], int]) -> list[U]:
    """Descending by score, ties broken by ascending original index."""
    require_finite_scores((u.score for u in units))
    return sorted(units, key=lambda u: (-u.score, original_index(u)))


def sort_chunks(chunks: Sequence[Chunk]) -> list[Chunk]:
    return sort_by_importance(chunks, lambda c: c.index_original)


def sort_sentences(chunk: Chunk) -> list:
    return sort_by_importance(chunk.sentences, lambda s: s.index_in_chunk)
