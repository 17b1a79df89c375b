"""fidattn: cross-attention importance scores from a fusion-in-decoder model."""

from .model import AttentionExporter, CrossAttentionTensor, TokenSlot
from .service import PROTOCOL_VERSION, create_app
from .tokenizer import WordOffsetTokenizer

__version__ = "0.1.0"

__all__ = [
    "AttentionExporter",
    "CrossAttentionTensor",
    "PROTOCOL_VERSION",
    "TokenSlot",
    "WordOffsetTokenizer",
    "create_app",
]
