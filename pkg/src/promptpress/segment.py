"""Context segmentation: context -> chunks -> sentences.

Chunking follows the unit-first rule: a caller-supplied unit hint (retrieved
passage, demonstration, dialogue turn) or, absent hints, a blank-line
paragraph is one chunk, unless it exceeds the chunk token cap, in which case
its lines are packed greedily under the cap. Hint boundaries are never
crossed. A single line longer than the cap is hard-split at token
boundaries and flagged.

The sentence splitter is rule-based (terminal punctuation + abbreviation
list) and pluggable; pass any ``splitter(text) -> list[(start, end)]`` to
``split_sentences`` to swap in a reference tool.
"""

from __future__ import annotations

import re
from typing import Callable

from .errors import ValidationError
from .model import Chunk, CompressionConfig, Sentence
from .tokenization import TokenCounter, get_counter

_PARAGRAPH_SEP = re.compile(r"\n\s*\n")

# Terminal punctuation, optional closing quotes/brackets, with following
# whitespace and more text required (no boundary at end of chunk).
_BOUNDARY = re.compile("[.!?]+[\"'\\)\\]\u00bb\u201d\u2019]*(?=\\s+\\S)")


def _word_before(text: str, pos: int) -> str:
    i = pos
    while i > 0 and text[i - 1].isalnum():
        i -= 1
    return text[i:pos]

# Common abbreviations that do not end a sentence. Lowercase, no dots.
_ABBREVIATIONS = frozenset(
    """
    mr mrs ms dr prof rev hon st sr jr vs etc al approx appt dept est fig
    gen govt inc ltd co corp col capt sgt maj lt cmdr adm sen rep no nos
    vol pp ca cf eg ie viz resp univ assn bros ave blvd rd mt ft oz lbs
    jan feb mar apr jun jul aug sep sept oct nov dec mon tue wed thu fri sat sun
    """.split()
)


def sentence_spans(text: str) -> list[tuple[int, int]]:
    """Half-open sentence spans tiling ``text``.

    Inter-sentence whitespace belongs to the following span. Known
    limitation vs. trained splitters: single-letter initials ("J. K.")
    split; the abbreviation list is fixed, not corpus-derived.
    """
    boundaries: list[int] = []
    for m in _BOUNDARY.finditer(text):
        if "." in m.group() and _word_before(text, m.start()).lower() in _ABBREVIATIONS:
            continue
        boundaries.append(m.end())
    starts = [0] + boundaries
    ends = boundaries + [len(text)]
    return [(a, b) for a, b in zip(starts, ends) if text[a:b].strip()]


def split_sentences(
    chunk: Chunk,
    counter: TokenCounter,
    splitter: Callable[[str], list[tuple[int, int]]] = sentence_spans,
) -> tuple[Sentence, ...]:
    """Split a chunk into sentences with span-derived token counts.

    The chunk is tokenized once; each token is assigned to the sentence
    containing its first character, so sentence counts partition the chunk
    count exactly under any counter.
    """
    if not chunk.text.strip():
        raise ValidationError(f"chunk {chunk.index_original} has empty text")
    spans = splitter(chunk.text)
    if not spans:
        spans = [(0, len(chunk.text))]
    token_spans = counter.spans(chunk.text)
    counts = [0] * len(spans)
    si = 0
    for t_start, _ in token_spans:
        while si < len(spans) - 1 and t_start >= spans[si][1]:
            si += 1
        counts[si] += 1
    return tuple(
        Sentence(
            index_in_chunk=i,
            text=chunk.text[a:b].strip(),
            token_count=counts[i],
            char_span=(a, b),
        )
        for i, (a, b) in enumerate(spans)
    )


def _hard_split(line: str, cap: int, counter: TokenCounter) -> list[str]:
    spans = counter.spans(line)
    pieces = []
    for i in range(0, len(spans), cap):
        group = spans[i : i + cap]
        pieces.append(line[group[0][0] : group[-1][1]])
    return pieces


def segment_context(
    context: str,
    config: CompressionConfig,
    unit_hints: list[str] | None = None,
    counter: TokenCounter | None = None,
) -> list[Chunk]:
    """Split a context into ordered chunks under ``config.max_chunk_tokens``."""
    if not context.strip():
        raise ValidationError("context is empty")
    counter = counter or get_counter(config.tokenizer)
    cap = config.max_chunk_tokens

    if unit_hints is not None:
        units = list(unit_hints)
    else:
        units = _PARAGRAPH_SEP.split(context.replace("\r\n", "\n"))

    out: list[Chunk] = []

    def emit(text: str, hard: bool = False) -> None:
        out.append(
            Chunk(
                index_original=len(out),
                text=text,
                token_count=counter.count(text),
                hard_split=hard,
            )
        )

    for unit in units:
        unit = unit.strip("\n")
        if not unit.strip():
            continue
        if counter.count(unit) <= cap:
            emit(unit)
            continue
        pending: list[str] = []
        pending_tokens = 0

        def flush() -> None:
            nonlocal pending, pending_tokens
            if pending:
                emit("\n".join(pending))
                pending, pending_tokens = [], 0

        for line in unit.split("\n"):
            if not line.strip():
                continue
            n = counter.count(line)
            if n > cap:
                flush()
                for piece in _hard_split(line, cap, counter):
                    emit(piece, hard=True)
                continue
            if pending_tokens + n > cap:
                flush()
            pending.append(line)
            pending_tokens += n
        flush()
    if not out:
        raise ValidationError("context contains no countable content")
    return out
