"""Core domain types: prompts, chunks, sentences, scored spans, config, results.

All types are immutable after construction and safe to share across threads.
Score-bearing types (Chunk, Sentence) are updated functionally via
``dataclasses.replace``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import ConfigurationError, ValidationError

POOLING_MODES = ("mean", "max", "sum")
ORDERING_MODES = ("original", "sorted")

DEFAULT_RHO = 0.8
DEFAULT_GAMMA = 1.0
DEFAULT_MAX_CHUNK_TOKENS = 128
DEFAULT_EPSILON = 1e-12


@dataclass(frozen=True)
class Prompt:
    """An instruction/context/question triple, the unit of compression.

    ``question`` may be the empty string for tasks without one (e.g.
    summarization); ``context`` must be non-empty for any compression call.
    """

    instruction: str
    context: str
    question: str = ""
    source_id: str = ""


@dataclass(frozen=True)
class Sentence:
    """A sentence within a chunk.

    ``char_span`` is a half-open (start, end) offset pair into the parent
    chunk's text. Sentence spans tile the chunk without overlap;
    inter-sentence whitespace is attributed to the following sentence so a
    space-prefixed subword token lands in the sentence it starts. ``text``
    is the stripped span text.
    """

    index_in_chunk: int
    text: str
    token_count: int
    char_span: tuple[int, int]
    score: float = 0.0


@dataclass(frozen=True)
class Chunk:
    """A passage/paragraph-sized context unit.

    ``token_count`` is the length of ``text`` under the configured counting
    tokenizer and (barring a hard split of one over-long line, flagged via
    ``hard_split``) never exceeds the configured chunk cap.
    """

    index_original: int
    text: str
    token_count: int
    score: float = 0.0
    sentences: tuple[Sentence, ...] = ()
    hard_split: bool = False


@dataclass(frozen=True)
class ScoredSpan:
    """A character-offset span of a chunk's text carrying a token importance score.

    Spans for one chunk are sorted and non-overlapping; characters outside
    all spans carry zero importance.
    """

    char_start: int
    char_end: int
    score: float

    def __post_init__(self):
        if self.char_start >= self.char_end:
            raise ValidationError(
                f"empty span [{self.char_start}, {self.char_end})"
            )
        if not math.isfinite(self.score) or self.score < 0:
            raise ValidationError(f"span score must be finite and >= 0, got {self.score!r}")


@dataclass(frozen=True)
class CompressionConfig:
    """Knobs for one compression run.

    ``rho`` splits the removal budget between the chunk stage and the
    sentence stage; ``gamma`` controls how strongly low-importance chunks
    absorb the sentence-removal budget (0 = uniformly).
    """

    target_tokens: int
    rho: float = DEFAULT_RHO
    gamma: float = DEFAULT_GAMMA
    pooling: str = "mean"
    ordering: str = "original"
    max_chunk_tokens: int = DEFAULT_MAX_CHUNK_TOKENS
    epsilon: float = DEFAULT_EPSILON
    tokenizer: str = "whitespace"
    # Off by default: the two-stage budget split is fixed. When enabled, the
    # chunk stage's unused slack is added to the sentence budget.
    rollover_slack: bool = False

    def __post_init__(self):
        if self.target_tokens < 0:
            raise ConfigurationError(f"target_tokens must be >= 0, got {self.target_tokens}")
        if not 0.0 <= self.rho <= 1.0:
            raise ConfigurationError(f"rho must be in [0, 1], got {self.rho}")
        if self.gamma < 0:
            raise ConfigurationError(f"gamma must be >= 0, got {self.gamma}")
        if self.pooling not in POOLING_MODES:
            raise ConfigurationError(f"pooling must be one of {POOLING_MODES}, got {self.pooling!r}")
        if self.ordering not in ORDERING_MODES:
            raise ConfigurationError(
                f"ordering must be one of {ORDERING_MODES}, got {self.ordering!r}"
            )
        if self.max_chunk_tokens < 1:
            raise ConfigurationError(
                f"max_chunk_tokens must be >= 1, got {self.max_chunk_tokens}"
            )
        if self.epsilon <= 0:
            raise ConfigurationError(f"epsilon must be > 0, got {self.epsilon}")


@dataclass(frozen=True)
class BudgetPlan:
    """Integer removal budgets for one run.

    ``e_chunk`` and ``e_sent`` partition ``e_comp`` exactly;
    ``per_chunk`` (aligned with the kept chunks in score order) sums to
    ``e_sent`` exactly via largest-remainder rounding.
    """

    e_comp: int
    e_chunk: int
    e_sent: int
    per_chunk: tuple[int, ...] = ()


@dataclass(frozen=True)
class CompressionResult:
    """A compressed context plus the audit trail of the run.

    Token accounting is in pre-join unit counts:
    ``compressed_tokens == original_tokens - removed_chunk_tokens -
    removed_sentence_tokens``. ``joined_context_tokens`` is the recount of
    ``compressed_context`` after re-joining (join glue may differ from the
    original whitespace).
    """

    compressed_context: str
    original_tokens: int
    compressed_tokens: int
    joined_context_tokens: int
    plan: BudgetPlan
    # (original chunk index, kept sentence indices) per kept chunk, in
    # original context order. A chunk kept with zero sentences appears here
    # with an empty tuple and is dropped from the output text.
    kept_chunks: tuple[tuple[int, tuple[int, ...]], ...]
    removed_chunk_tokens: int
    removed_sentence_tokens: int
    flags: tuple[str, ...] = ()

    @property
    def e_comp(self) -> int:
        return self.plan.e_comp

    @property
    def e_chunk(self) -> int:
        return self.plan.e_chunk

    @property
    def e_sent(self) -> int:
        return self.plan.e_sent

    def audit_dict(self) -> dict:
        """Audit trail as plain data, suitable for JSON."""
        return {
            "original_tokens": self.original_tokens,
            "compressed_tokens": self.compressed_tokens,
            "joined_context_tokens": self.joined_context_tokens,
            "e_comp": self.e_comp,
            "e_chunk": self.e_chunk,
            "e_sent": self.e_sent,
            "per_chunk_budgets": list(self.plan.per_chunk),
            "kept_chunks": [
                {"chunk": idx, "sentences": list(sents)} for idx, sents in self.kept_chunks
            ],
            "removed_chunk_tokens": self.removed_chunk_tokens,
            "removed_sentence_tokens": self.removed_sentence_tokens,
            "flags": list(self.flags),
        }


def require_finite_scores(scores, what: str = "score") -> None:
    """Raise ValidationError unless every value is finite and >= 0."""
    for s in scores:
        if not math.isfinite(s) or s < 0:
            raise ValidationError(f"{what} must be finite and >= 0, got {s!r}")
