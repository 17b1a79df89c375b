"""Answer-containment metric for QA evaluation."""

from __future__ import annotations

import re
import string

from .errors import ValidationError

_ARTICLES = re.compile(r"\b(a|an|the)\b")
_PUNCT_TABLE = str.maketrans("", "", string.punctuation)


def normalize_answer(text: str) -> str:
    """Lowercase, delete punctuation, strip articles, collapse whitespace.

    Performed in that order (the conventional QA normalization), so e.g.
    "a.m." becomes "am" before article stripping runs.
    """
    text = text.lower().translate(_PUNCT_TABLE)
    text = _ARTICLES.sub(" ", text)
    return " ".join(text.split())


def span_em(prediction: str, answers: list[str] | tuple[str, ...]) -> int:
    """1 iff any normalized answer is a substring of the normalized prediction.

    An answer that normalizes to the empty string never matches.
    """
    if not answers:
        raise ValidationError("span_em requires a non-empty answer list")
    pred = normalize_answer(prediction)
    for answer in answers:
        norm = normalize_answer(answer)
        if norm and norm in pred:
            return 1
    return 0
