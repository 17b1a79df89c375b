"""Offset-preserving tokenizers for the exporter.

The word tokenizer backs the seeded tiny model used in tests and debugging:
ids are stable CRC hashes, offsets are exact character spans. Checkpoint
runs use the checkpoint's own fast tokenizer, which provides offsets via
its offset mapping.
"""

from __future__ import annotations

import re
import zlib
from dataclasses import dataclass

_TOKEN = re.compile(r"\S+")

PAD_ID = 0
EOS_ID = 1
_RESERVED = 2


@dataclass(frozen=True)
class Encoded:
    ids: list[int]
    offsets: list[tuple[int, int]]  # char spans; special tokens get (-1, -1)
    special: list[bool]


class WordOffsetTokenizer:
    """Deterministic whitespace tokenizer with hashed ids and char offsets."""

    def __init__(self, vocab_size: int = 512):
        if vocab_size <= _RESERVED:
            raise ValueError("vocab_size must exceed the reserved id range")
        self.vocab_size = vocab_size
        self.pad_id = PAD_ID
        self.eos_id = EOS_ID

    def token_id(self, word: str) -> int:
        return _RESERVED + zlib.crc32(word.encode("utf-8")) % (self.vocab_size - _RESERVED)

    def encode(self, text: str, max_length: int | None = None) -> Encoded:
        """Tokenize with offsets, append EOS, truncate to ``max_length``."""
        ids: list[int] = []
        offsets: list[tuple[int, int]] = []
        special: list[bool] = []
        for m in _TOKEN.finditer(text):
            ids.append(self.token_id(m.group()))
            offsets.append(m.span())
            special.append(False)
        ids.append(self.eos_id)
        offsets.append((-1, -1))
        special.append(True)
        if max_length is not None and len(ids) > max_length:
            ids = ids[:max_length]
            offsets = offsets[:max_length]
            special = special[:max_length]
        return Encoded(ids=ids, offsets=offsets, special=special)
