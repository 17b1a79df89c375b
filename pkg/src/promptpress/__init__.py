"""promptpress: hierarchical prompt compression to a token budget.

Pipeline: segment the context into chunks and sentences, score every token
with a pluggable backend, pool scores into unit importance, then prune whole
chunks and sentences until the removal budget is met, preserving semantic
units and document order.
"""

from .compress import (
    allocate_sentence_budgets,
    compress,
    plan_budgets,
    restore_order_and_join,
    select_chunks,
    select_sentences,
)
from .errors import (
    ConfigurationError,
    DatasetError,
    PromptPressError,
    ProtocolError,
    TransportError,
    ValidationError,
)
from .model import (
    BudgetPlan,
    Chunk,
    CompressionConfig,
    CompressionResult,
    Prompt,
    ScoredSpan,
    Sentence,
)
from .remote import RemoteScorer
from .scoring import (
    LexicalScorer,
    ScoreRequest,
    ScoreResponse,
    ScorerGateway,
    UniformScorer,
)
from .segment import segment_context, sentence_spans, split_sentences
from .tokenization import count_tokens, get_counter, register_counter

__version__ = "0.1.0"

__all__ = [
    "BudgetPlan",
    "Chunk",
    "CompressionConfig",
    "CompressionResult",
    "ConfigurationError",
    "DatasetError",
    "LexicalScorer",
    "Prompt",
    "PromptPressError",
    "ProtocolError",
    "RemoteScorer",
    "ScoreRequest",
    "ScoreResponse",
    "ScoredSpan",
    "ScorerGateway",
    "Sentence",
    "TransportError",
    "UniformScorer",
    "ValidationError",
    "allocate_sentence_budgets",
    "compress",
    "count_tokens",
    "get_counter",
    "plan_budgets",
    "register_counter",
    "restore_order_and_join",
    "segment_context",
    "select_chunks",
    "select_sentences",
    "sentence_spans",
    "split_sentences",
]
