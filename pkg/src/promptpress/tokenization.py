"""Pluggable token counters used for all budget arithmetic.

Every counter exposes ``count`` and ``spans``. ``spans`` returns one
half-open character span per token, sorted and non-overlapping, so that
sentence token counts can be derived by span containment: a token belongs
to the sentence containing its first character. That rule guarantees the
sentence counts of a chunk partition the chunk count exactly, for any
counter.

The ``whitespace`` counter is always registered and is the test/default
profile. A byte-pair counter can be loaded from local ``vocab.json`` +
``merges.txt`` files via the name ``bpe:<dir>``.
"""

from __future__ import annotations

import json
import re
import threading
from functools import lru_cache
from pathlib import Path
from typing import Protocol, runtime_checkable

from .errors import ConfigurationError

_WS_TOKEN = re.compile(r"\S+")


@runtime_checkable
class TokenCounter(Protocol):
    name: str

    def count(self, text: str) -> int: ...

    def spans(self, text: str) -> list[tuple[int, int]]: ...


class WhitespaceCounter:
    """Counts maximal runs of non-whitespace characters."""

    name = "whitespace"

    def count(self, text: str) -> int:
        return len(text.split())

    def spans(self, text: str) -> list[tuple[int, int]]:
        return [m.span() for m in _WS_TOKEN.finditer(text)]


# Simplified GPT-2-style pre-tokenizer (stdlib `re` has no \p classes; ASCII
# letter/digit classes are used instead). Deterministic and self-consistent,
# which is all the counting contract requires.
_BPE_PRETOKEN = re.compile(
    r"'s|'t|'re|'ve|'m|'ll|'d| ?[A-Za-z]+| ?\d+| ?[^\sA-Za-z\d]+|\s+(?!\S)|\s+"
)


def _bytes_to_unicode() -> dict[int, str]:
    # GPT-2 reversible byte <-> printable-unicode table.
    bs = (
        list(range(ord("!"), ord("~") + 1))
        + list(range(ord("\xa1"), ord("\xac") + 1))
        + list(range(ord("\xae"), ord("\xff") + 1))
    )
    cs = bs[:]
    n = 0
    for b in range(256):
        if b not in bs:
            bs.append(b)
            cs.append(256 + n)
            n += 1
    return dict(zip(bs, (chr(c) for c in cs)))


class BpeCounter:
    """Byte-level BPE counter loaded from local vocab/merges files.

    Token spans are mapped back to character offsets; a token that starts
    mid-character (possible when a merge splits a multi-byte UTF-8
    character) is attributed to the character containing its first byte.
    """

    def __init__(self, vocab_path: str | Path, merges_path: str | Path, name: str = "bpe"):
        self.name = name
        vocab_path = Path(vocab_path)
        merges_path = Path(merges_path)
        if not vocab_path.is_file() or not merges_path.is_file():
            raise ConfigurationError(
                f"BPE counter needs vocab.json and merges.txt, looked in "
                f"{vocab_path.parent}"
            )
        self.vocab: dict[str, int] = json.loads(vocab_path.read_text(encoding="utf-8"))
        ranks: dict[tuple[str, str], int] = {}
        for i, line in enumerate(merges_path.read_text(encoding="utf-8").splitlines()):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            if len(parts) != 2:
                raise ConfigurationError(f"bad merges line {i + 1}: {line!r}")
            ranks[(parts[0], parts[1])] = len(ranks)
        self._ranks = ranks
        self._byte_enc = _bytes_to_unicode()
        self._cache: dict[str, tuple[str, ...]] = {}
        self._lock = threading.Lock()

    def _merge(self, pretoken: str) -> tuple[str, ...]:
        with self._lock:
            cached = self._cache.get(pretoken)
        if cached is not None:
            return cached
        word = [self._byte_enc[b] for b in pretoken.encode("utf-8")]
        while len(word) > 1:
            pairs = {(word[i], word[i + 1]) for i in range(len(word) - 1)}
            best = min(pairs, key=lambda p: self._ranks.get(p, float("inf")))
            if best not in self._ranks:
                break
            merged: list[str] = []
            i = 0
            while i < len(word):
                if i < len(word) - 1 and (word[i], word[i + 1]) == best:
                    merged.append(word[i] + word[i + 1])
                    i += 2
                else:
                    merged.append(word[i])
                    i += 1
            word = merged
        result = tuple(word)
        with self._lock:
            self._cache[pretoken] = result
        return result

    def count(self, text: str) -> int:
        return sum(len(self._merge(m.group())) for m in _BPE_PRETOKEN.finditer(text))

    def spans(self, text: str) -> list[tuple[int, int]]:
        out: list[tuple[int, int]] = []
        for m in _BPE_PRETOKEN.finditer(text):
            pretoken = m.group()
            # byte offset -> char offset map within this pre-token
            byte_to_char: list[int] = []
            for ci, ch in enumerate(pretoken):
                byte_to_char.extend([ci] * len(ch.encode("utf-8")))
            byte_to_char.append(len(pretoken))
            pos = 0
            for sym in self._merge(pretoken):
                nbytes = len(sym)  # one table char per byte
                start_c = byte_to_char[pos]
                end_b = pos + nbytes
                end_c = byte_to_char[end_b - 1] + 1
                out.append((m.start() + start_c, m.start() + end_c))
                pos = end_b
        return out


_REGISTRY: dict[str, TokenCounter] = {}
_registry_lock = threading.Lock()


def register_counter(counter: TokenCounter) -> None:
    with _registry_lock:
        _REGISTRY[counter.name] = counter


register_counter(WhitespaceCounter())


@lru_cache(maxsize=8)
def _load_bpe(directory: str) -> BpeCounter:
    d = Path(directory)
    return BpeCounter(d / "vocab.json", d / "merges.txt", name=f"bpe:{directory}")


def get_counter(name: str) -> TokenCounter:
    """Resolve a counter by registry name or a ``bpe:<dir>`` spec."""
    with _registry_lock:
        if name in _REGISTRY:
            return _REGISTRY[name]
    if name.startswith("bpe:"):
        return _load_bpe(name[len("bpe:"):])
    raise ConfigurationError(
        f"unknown tokenizer {name!r}; registered: {sorted(_REGISTRY)} or 'bpe:<dir>'"
    )


def count_tokens(text: str, tokenizer: str | TokenCounter = "whitespace") -> int:
    """Count tokens under a named or given counter. count_tokens('') == 0."""
    counter = get_counter(tokenizer) if isinstance(tokenizer, str) else tokenizer
    return counter.count(text)
