"""Dataset ingestion and evaluation prompt templates.

Two JSONL record shapes are supported:

* ``nq``: ``{"question": str, "answers": [str], "ctxs": [{"title": str,
  "text": str}, ...]}``: each retrieved passage becomes one context unit
  framed as ``Document [k](Title: ...) ...``.
* ``longbench``: ``{"input": str, "context": str, "answers": [str],
  "dataset"|"task": str}``: one long document per record; the task name
  selects the evaluation prompt template.

Malformed rows are reported with their line number and either skipped
(lenient) or fatal (strict).
"""

from __future__ import annotations

import json
import logging
import random
from dataclasses import dataclass
from pathlib import Path
from typing import Iterator

from .errors import DatasetError
from .model import Prompt

log = logging.getLogger(__name__)

DATASET_FORMATS = ("nq", "longbench")


@dataclass(frozen=True)
class EvalRecord:
    id: str
    question: str
    answers: tuple[str, ...]
    context_units: tuple[str, ...]
    task_tag: str


def frame_passage(rank: int, title: str, text: str) -> str:
    """Retrieval-passage framing used in the QA evaluation prompt."""
    return f"Document [{rank}](Title: {title}) {text}"


# Evaluation prompt templates, one per task tag. ``{context}`` receives the
# (compressed) context; ``{question}`` the record's question/input. The text
# before {context} is the instruction for compression purposes; the text
# from {context} on provides the question framing.
PROMPT_TEMPLATES: dict[str, str] = {
    "nq": (
        "Write a high-quality answer for the given question using only the "
        "provided search results (some of which might be irrelevant).\n"
        "{context}\nQuestion: {question}\nAnswer:"
    ),
    "narrativeqa": (
        "You are given a story, which can be either a novel or a movie script, and "
        "a question. Answer the question as concisely as you can, using a single "
        "phrase if possible. Do not provide any explanation.\n\nStory: {context}\n\n"
        "Now, answer the question based on the story as concisely as you can, using "
        "a single phrase if possible. Do not provide any explanation.\n\n"
        "Question: {question}\n\nAnswer:"
    ),
    "qasper": (
        "You are given a scientific article and a question. Answer the question as "
        "concisely as you can, using a single phrase or sentence if possible. If "
        'the question cannot be answered based on the information in the article, '
        'write "unanswerable". If the question is a yes/no question, answer "yes", '
        '"no", or "unanswerable". Do not provide any explanation.\n\n'
        "Article: {context}\n\n"
        "Answer the question based on the above article as concisely as you can, "
        "using a single phrase or sentence if possible. If the question cannot be "
        'answered based on the information in the article, write "unanswerable". '
        'If the question is a yes/no question, answer "yes", "no", or '
        '"unanswerable". Do not provide any explanation.\n\n'
        "Question: {question}\n\nAnswer:"
    ),
    "multifieldqa_en": (
        "Read the following text and answer briefly.\n\n{context}\n\n"
        "Now, answer the following question based on the above text, only give me "
        "the answer and do not output any other words.\n\n"
        "Question: {question}\nAnswer:"
    ),
    "hotpotqa": (
        "Answer the question based on the given passages. Only give me the answer "
        "and do not output any other words.\n\nThe following are given passages.\n"
        "{context}\n\nAnswer the question based on the given passages. Only give "
        "me the answer and do not output any other words.\n\n"
        "Question: {question}\nAnswer:"
    ),
    "2wikimqa": (
        "Answer the question based on the given passages. Only give me the answer "
        "and do not output any other words.\n\nThe following are given passages.\n"
        "{context}\n\nAnswer the question based on the given passages. Only give "
        "me the answer and do not output any other words.\n\n"
        "Question: {question}\nAnswer:"
    ),
    "musique": (
        "Answer the question based on the given passages. Only give me the answer "
        "and do not output any other words.\n\nThe following are given passages.\n"
        "{context}\n\nAnswer the question based on the given passages. Only give "
        "me the answer and do not output any other words.\n\n"
        "Question: {question}\nAnswer:"
    ),
    "gov_report": (
        "You are given a report by a government agency. Write a one-page summary "
        "of the report.\n\nReport:\n{context}\n\nNow, write a one-page summary of "
        "the report.\n\nSummary:"
    ),
    "qmsum": (
        "You are given a meeting transcript and a query containing a question or "
        "instruction. Answer the query in one or more sentences.\n\n"
        "Transcript: {context}\n\nNow, answer the query based on the above meeting "
        "transcript in one or more sentences.\n\nQuery: {question}\nAnswer:"
    ),
    "multi_news": (
        "You are given several news passages. Write a one-page summary of all "
        "news.\n\nNews: {context}\n\nNow, write a one-page summary of all the "
        "news.\n\nSummary:"
    ),
    "trec": (
        "Please determine the type of the question below. Here are some examples "
        "of questions.\n\n{context}\n{question}"
    ),
    "triviaqa": (
        "Answer the question based on the given passage. Only give me the answer "
        "and do not output any other words. The following are some examples.\n\n"
        "{context}\n\n{question}"
    ),
    "samsum": (
        "Summarize the dialogue into a few short sentences. The following are some "
        "examples.\n\n{context}\n\n{question}"
    ),
    "lcc": "Please complete the code given below. \n{context}Next line of code:\n",
    "repobench-p": (
        "Please complete the code given below. \n{context}{question}Next line of "
        "code:\n"
    ),
}

_FALLBACK_TEMPLATE = "{context}\n\nQuestion: {question}\nAnswer:"


def template_for(task_tag: str) -> str:
    return PROMPT_TEMPLATES.get(task_tag, _FALLBACK_TEMPLATE)


def build_prompt_text(task_tag: str, context: str, question: str) -> str:
    return template_for(task_tag).format(context=context, question=question)


def record_to_prompt(record: EvalRecord) -> tuple[Prompt, list[str]]:
    """Turn a record into a compression prompt plus its unit hints.

    The template text before ``{context}`` is the instruction; the remainder
    (with the question substituted) is the question part, so the full prompt
    length seen by budget planning matches what a downstream model would
    receive.
    """
    template = template_for(record.task_tag)
    head, _, tail = template.partition("{context}")
    units = list(record.context_units)
    return (
        Prompt(
            instruction=head.strip(),
            context="\n".join(units),
            question=tail.format(question=record.question).strip(),
            source_id=record.id,
        ),
        units,
    )


def _parse_nq_row(row: dict, line_no: int, path: str) -> EvalRecord:
    try:
        question = row["question"]
        answers = tuple(row["answers"])
        ctxs = row["ctxs"]
        units = tuple(
            frame_passage(k, ctx.get("title", ""), ctx["text"])
            for k, ctx in enumerate(ctxs, start=1)
        )
    except (KeyError, TypeError) as exc:
        raise DatasetError(
            f"{path}:{line_no}: malformed nq row ({exc!r})", path=path, line=line_no
        ) from exc
    if not answers:
        raise DatasetError(f"{path}:{line_no}: nq row has no answers", path=path, line=line_no)
    if not units:
        raise DatasetError(f"{path}:{line_no}: nq row has no ctxs", path=path, line=line_no)
    return EvalRecord(
        id=str(row.get("id", line_no)),
        question=question,
        answers=answers,
        context_units=units,
        task_tag="nq",
    )


def _parse_longbench_row(row: dict, line_no: int, path: str) -> EvalRecord:
    try:
        question = row["input"]
        context = row["context"]
        answers = tuple(row.get("answers", ()))
    except (KeyError, TypeError) as exc:
        raise DatasetError(
            f"{path}:{line_no}: malformed longbench row ({exc!r})", path=path, line=line_no
        ) from exc
    if not context:
        raise DatasetError(
            f"{path}:{line_no}: longbench row has empty context", path=path, line=line_no
        )
    task = row.get("dataset") or row.get("task") or "unknown"
    return EvalRecord(
        id=str(row.get("_id", row.get("id", line_no))),
        question=question,
        answers=answers,
        context_units=(context,),
        task_tag=task,
    )


def load_dataset(
    path: str | Path, format: str, strict: bool = True
) -> Iterator[EvalRecord]:
    """Stream records from a JSONL file in file order."""
    if format not in DATASET_FORMATS:
        raise DatasetError(f"unknown dataset format {format!r}; expected {DATASET_FORMATS}")
    parse = _parse_nq_row if format == "nq" else _parse_longbench_row
    path = Path(path)
    with path.open(encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                row = json.loads(line)
                record = parse(row, line_no, str(path))
            except (json.JSONDecodeError, DatasetError) as exc:
                if strict:
                    if isinstance(exc, DatasetError):
                        raise
                    raise DatasetError(
                        f"{path}:{line_no}: invalid JSON ({exc})", path=str(path), line=line_no
                    ) from exc
                log.warning("%s:%d: skipping malformed row (%s)", path, line_no, exc)
                continue
            yield record


def sample_records(
    records: list[EvalRecord], fraction: float, seed: int
) -> list[EvalRecord]:
    """Seeded subsample for tuning runs; file order is preserved."""
    if not 0 < fraction <= 1:
        raise DatasetError(f"sample fraction must be in (0, 1], got {fraction}")
    k = max(1, round(len(records) * fraction))
    rng = random.Random(seed)
    picked = sorted(rng.sample(range(len(records)), k))
    return [records[i] for i in picked]
