"""Two-stage hierarchical compression.

Stage 1 drops whole chunks in ascending-importance order until the chunk
removal budget would be overshot; stage 2 distributes the sentence removal
budget across the kept chunks in inverse proportion to their importance
(exponent gamma) and drops sentences the same way. Removal always undershoots:
the unused slack is bounded by the size of the last kept unit.

The instruction and question of a prompt are never compressed; the removal
budget is computed from the full prompt length but applied to context units
only.
"""

from __future__ import annotations

import math
from typing import Sequence

from .errors import ValidationError
from .model import (
    BudgetPlan,
    Chunk,
    CompressionConfig,
    CompressionResult,
    Prompt,
    Sentence,
)
from .aggregate import (
    aggregate_chunk_scores,
    aggregate_sentence_scores,
    sort_chunks,
    sort_sentences,
)
from .scoring import ScoreRequest, ScorerGateway
from .segment import segment_context, split_sentences
from .tokenization import TokenCounter, get_counter


def plan_budgets(original_tokens: int, config: CompressionConfig) -> BudgetPlan:
    """Split the total removal budget between the chunk and sentence stages.

    ``e_chunk`` and ``e_sent`` partition ``e_comp`` exactly (single rounding,
    no drift). ``e_comp == 0`` means the whole run is a no-op.
    """
    e_comp = max(0, original_tokens - config.target_tokens)
    e_chunk = int(round(config.rho * e_comp))
    return BudgetPlan(e_comp=e_comp, e_chunk=e_chunk, e_sent=e_comp - e_chunk)


def _select_prefix(token_counts: Sequence[int], budget: int) -> tuple[int, int]:
    """Shared selection loop: units sorted by descending importance.

    Returns (kept prefix length, removed tokens). Breaks at the first
    position whose suffix total fits the budget; keeps everything before it.
    """
    n = len(token_counts)
    suffix = [0] * (n + 1)
    for i in range(n - 1, -1, -1):
        suffix[i] = suffix[i + 1] + token_counts[i]
    kept = 0
    for i in range(n):
        if budget >= suffix[i]:
            break
        kept += 1
    return kept, suffix[kept]


def select_chunks(sorted_chunks: Sequence[Chunk], e_chunk: int) -> tuple[list[Chunk], int]:
    """Keep the highest-importance prefix; drop the suffix within budget."""
    kept, removed = _select_prefix([c.token_count for c in sorted_chunks], e_chunk)
    return list(sorted_chunks[:kept]), removed


def allocate_sentence_budgets(
    kept_chunks: Sequence[Chunk], e_sent: int, gamma: float, epsilon: float
) -> list[int]:
    """Integer per-chunk sentence budgets, inversely weighted by chunk score.

    Real-valued shares ``(1/max(score, eps))**gamma`` are normalized and
    scaled by ``e_sent``, then integerized by floor plus largest-remainder so
    the budgets sum to ``e_sent`` exactly (remainder ties go to the lower
    position). ``gamma == 0`` degenerates to uniform shares.
    """
    if not kept_chunks:
        if e_sent > 0:
            raise ValidationError("sentence budget with no kept chunks")
        return []
    weights = [(1.0 / max(c.score, epsilon)) ** gamma for c in kept_chunks]
    total = sum(weights)
    if math.isinf(total):
        # Extreme gamma overflowed some weights; those chunks split the budget.
        weights = [1.0 if math.isinf(w) else 0.0 for w in weights]
        total = sum(weights)
    real = [w / total * e_sent for w in weights]
    budgets = [math.floor(r) for r in real]
    remainder = e_sent - sum(budgets)
    by_fraction = sorted(range(len(real)), key=lambda i: (budgets[i] - real[i], i))
    i = 0
    while remainder > 0:
        budgets[by_fraction[i % len(budgets)]] += 1
        remainder -= 1
        i += 1
    return budgets


def select_sentences(
    sorted_sentences: Sequence[Sentence], budget: int
) -> tuple[list[Sentence], int]:
    """Same selection loop at sentence granularity. May keep zero sentences."""
    kept, removed = _select_prefix([s.token_count for s in sorted_sentences], budget)
    return list(sorted_sentences[:kept]), removed


def _chunk_output_text(chunk: Chunk, kept: Sequence[Sentence]) -> str:
    # A fully kept chunk is emitted byte-identically; partial keeps are
    # re-joined with single spaces in original sentence order.
    if len(kept) == len(chunk.sentences):
        return chunk.text
    ordered = sorted(kept, key=lambda s: s.index_in_chunk)
    return " ".join(s.text for s in ordered)


def restore_order_and_join(
    kept: Sequence[tuple[Chunk, Sequence[Sentence]]], ordering: str
) -> str:
    """Join kept units into the compressed context.

    ``original`` restores document order; ``sorted`` leaves chunks in
    descending-importance order (the retrieval-style mode that counters
    mid-prompt blindness of downstream models). Sentences inside a chunk are
    always in original order. Chunks left empty by the sentence stage are
    dropped.
    """
    if ordering == "original":
        kept = sorted(kept, key=lambda pair: pair[0].index_original)
    parts = []
    for chunk, sentences in kept:
        if not sentences:
            continue
        parts.append(_chunk_output_text(chunk, sentences))
    return "\n".join(parts)


def _scored_chunks(
    prompt: Prompt,
    chunks: list[Chunk],
    config: CompressionConfig,
    gateway: ScorerGateway,
    backend: str,
    counter: TokenCounter,
    options: dict | None = None,
) -> list[Chunk]:
    chunks = [
        c if c.sentences else _with_sentences(c, counter) for c in chunks
    ]
    request = ScoreRequest(
        question=prompt.question,
        chunks=tuple(c.text for c in chunks),
        backend=backend,
        options=options or {},
    )
    response = gateway.score(request)
    chunks = aggregate_chunk_scores(chunks, response.per_chunk, config.pooling)
    return [
        aggregate_sentence_scores(chunk, spans, config.pooling)
        for chunk, spans in zip(chunks, response.per_chunk)
    ]


def _with_sentences(chunk: Chunk, counter: TokenCounter) -> Chunk:
    from dataclasses import replace

    return replace(chunk, sentences=split_sentences(chunk, counter))


def compress(
    prompt: Prompt,
    config: CompressionConfig,
    gateway: ScorerGateway | None = None,
    backend: str = "uniform",
    unit_hints: list[str] | None = None,
    scorer_options: dict | None = None,
) -> CompressionResult:
    """End-to-end compression of one prompt.

    Composes segmentation, scoring, aggregation, budget planning and the two
    selection stages, then restores order. Deterministic given fixed inputs,
    config and scorer response. When the prompt already fits the target the
    context is returned unchanged.
    """
    if not prompt.context.strip():
        raise ValidationError("prompt context is empty")
    counter = get_counter(config.tokenizer)
    gateway = gateway or ScorerGateway()

    chunks = segment_context(prompt.context, config, unit_hints=unit_hints, counter=counter)
    chunks = [_with_sentences(c, counter) for c in chunks]
    fixed_tokens = counter.count(prompt.instruction) + counter.count(prompt.question)
    context_tokens = sum(c.token_count for c in chunks)
    original_tokens = fixed_tokens + context_tokens

    flags = []
    if any(c.hard_split for c in chunks):
        flags.append("hard_split")

    plan = plan_budgets(original_tokens, config)
    if plan.e_comp == 0:
        kept_all = tuple(
            (c.index_original, tuple(s.index_in_chunk for s in c.sentences)) for c in chunks
        )
        return CompressionResult(
            compressed_context=prompt.context,
            original_tokens=original_tokens,
            compressed_tokens=original_tokens,
            joined_context_tokens=counter.count(prompt.context),
            plan=plan,
            kept_chunks=kept_all,
            removed_chunk_tokens=0,
            removed_sentence_tokens=0,
            flags=tuple(flags + ["noop"]),
        )

    chunks = _scored_chunks(
        prompt, chunks, config, gateway, backend, counter, scorer_options
    )
    ranked = sort_chunks(chunks)
    kept_chunks, removed_chunk = select_chunks(ranked, plan.e_chunk)
    if not kept_chunks:
        flags.append("all_chunks_dropped")

    e_sent = plan.e_sent
    if config.rollover_slack:
        e_sent += plan.e_chunk - removed_chunk
    budgets = (
        allocate_sentence_budgets(kept_chunks, e_sent, config.gamma, config.epsilon)
        if kept_chunks
        else []
    )
    plan = BudgetPlan(plan.e_comp, plan.e_chunk, plan.e_sent, tuple(budgets))

    removed_sentence = 0
    kept_structure: list[tuple[Chunk, list[Sentence]]] = []
    for chunk, budget in zip(kept_chunks, budgets):
        kept_sents, removed = select_sentences(sort_sentences(chunk), budget)
        removed_sentence += removed
        kept_structure.append((chunk, kept_sents))

    compressed_context = restore_order_and_join(kept_structure, config.ordering)
    if not compressed_context:
        flags.append("empty_output")

    kept_audit = tuple(
        (chunk.index_original, tuple(sorted(s.index_in_chunk for s in sents)))
        for chunk, sents in sorted(kept_structure, key=lambda p: p[0].index_original)
    )
    return CompressionResult(
        compressed_context=compressed_context,
        original_tokens=original_tokens,
        compressed_tokens=original_tokens - removed_chunk - removed_sentence,
        joined_context_tokens=counter.count(compressed_context),
        plan=plan,
        kept_chunks=kept_audit,
        removed_chunk_tokens=removed_chunk,
        removed_sentence_tokens=removed_sentence,
        flags=tuple(flags),
    )
