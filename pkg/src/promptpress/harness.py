"""Evaluation harness: compression runs over datasets, metrics, reports.

Latency is wall-clock per record covering segmentation through join, with
scorer time also reported separately. Records are processed with bounded
parallelism and merged deterministically in input order, so two runs with
the same seed and config produce identical reports except for the latency
columns.
"""

from __future__ import annotations

import csv
import json
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Iterable, Mapping, Protocol

from .compress import compress, plan_budgets
from .datasets import EvalRecord, build_prompt_text, record_to_prompt
from .errors import ConfigurationError
from .metrics import span_em
from .model import CompressionConfig, CompressionResult, Prompt
from .scoring import ScoreRequest, ScorerGateway
from .segment import segment_context
from .tokenization import get_counter

VARIANTS = ("full", "chunk_only", "sentence_only", "token_only")

REPORT_COLUMNS = (
    "id",
    "original_tokens",
    "compressed_tokens",
    "ratio",
    "compression_latency_ms",
    "scorer_latency_ms",
    "metric_value",
    "error",
)


class GenerationClient(Protocol):
    """Downstream text generator. Real LLM clients live outside this package."""

    def generate(self, prompt: str) -> str: ...


class StaticClient:
    """Stub client echoing a fixed string; lets metric plumbing run end-to-end."""

    def __init__(self, text: str = ""):
        self.text = text

    def generate(self, prompt: str) -> str:
        return self.text


@dataclass(frozen=True)
class RecordRow:
    id: str
    original_tokens: int
    compressed_tokens: int
    compression_latency_ms: float
    scorer_latency_ms: float
    metric_value: float | None
    error: str = ""

    @property
    def ratio(self) -> float:
        if self.original_tokens == 0:
            return 1.0
        return self.compressed_tokens / self.original_tokens


@dataclass(frozen=True)
class EvalReport:
    rows: tuple[RecordRow, ...]
    tokenizer_name: str
    config: Mapping[str, object]
    mean_ratio: float = 0.0
    mean_latency_ms: float = 0.0
    mean_scorer_latency_ms: float = 0.0
    metric_mean: float | None = None
    errors: int = 0

    def recompute_aggregates(self) -> "EvalReport":
        ok = [r for r in self.rows if not r.error]
        metrics = [r.metric_value for r in ok if r.metric_value is not None]
        return replace(
            self,
            mean_ratio=sum(r.ratio for r in ok) / len(ok) if ok else 0.0,
            mean_latency_ms=(
                sum(r.compression_latency_ms for r in ok) / len(ok) if ok else 0.0
            ),
            mean_scorer_latency_ms=(
                sum(r.scorer_latency_ms for r in ok) / len(ok) if ok else 0.0
            ),
            metric_mean=sum(metrics) / len(metrics) if metrics else None,
            errors=sum(1 for r in self.rows if r.error),
        )


class _TimingGateway:
    """Wraps a gateway to accumulate scorer wall time for one record."""

    def __init__(self, inner: ScorerGateway):
        self.inner = inner
        self.elapsed_s = 0.0

    def score(self, request: ScoreRequest):
        t0 = time.perf_counter()
        try:
            return self.inner.score(request)
        finally:
            self.elapsed_s += time.perf_counter() - t0


def variant_config(config: CompressionConfig, variant: str) -> CompressionConfig:
    """Config for an ablation variant (chunk-only / sentence-only)."""
    if variant not in VARIANTS:
        raise ConfigurationError(f"unknown variant {variant!r}; expected {VARIANTS}")
    if variant == "chunk_only":
        return replace(config, rho=1.0)
    if variant == "sentence_only":
        return replace(config, rho=0.0)
    return config


def token_level_compress(
    prompt: Prompt,
    config: CompressionConfig,
    gateway: ScorerGateway | None = None,
    backend: str = "uniform",
    unit_hints: list[str] | None = None,
) -> CompressionResult:
    """Diagnostic token-granularity mode: keeps top-scoring token spans verbatim.

    Breaks grammatical structure by design; exists only so the ablation's
    shape can be studied. Kept spans stay in original order, joined by spaces.
    """
    counter = get_counter(config.tokenizer)
    gateway = gateway or ScorerGateway()
    chunks = segment_context(prompt.context, config, unit_hints=unit_hints, counter=counter)
    fixed = counter.count(prompt.instruction) + counter.count(prompt.question)
    context_tokens = sum(c.token_count for c in chunks)
    original = fixed + context_tokens
    plan = plan_budgets(original, config)
    if plan.e_comp == 0:
        return CompressionResult(
            compressed_context=prompt.context,
            original_tokens=original,
            compressed_tokens=original,
            joined_context_tokens=counter.count(prompt.context),
            plan=plan,
            kept_chunks=tuple((c.index_original, ()) for c in chunks),
            removed_chunk_tokens=0,
            removed_sentence_tokens=0,
            flags=("noop", "token_level"),
        )
    response = gateway.score(
        ScoreRequest(
            question=prompt.question, chunks=tuple(c.text for c in chunks), backend=backend
        )
    )
    indexed = [
        (span.score, ci, span)
        for ci, spans in enumerate(response.per_chunk)
        for span in spans
    ]
    keep_n = max(0, len(indexed) - plan.e_comp)
    top = sorted(indexed, key=lambda t: (-t[0], t[1], t[2].char_start))[:keep_n]
    top.sort(key=lambda t: (t[1], t[2].char_start))
    text = " ".join(chunks[ci].text[s.char_start : s.char_end] for _, ci, s in top)
    removed = len(indexed) - keep_n
    return CompressionResult(
        compressed_context=text,
        original_tokens=original,
        compressed_tokens=original - removed,
        joined_context_tokens=counter.count(text),
        plan=plan,
        kept_chunks=tuple((ci, ()) for ci in sorted({ci for _, ci, _ in top})),
        removed_chunk_tokens=0,
        removed_sentence_tokens=removed,
        flags=("token_level",),
    )


def compress_record(
    record: EvalRecord,
    config: CompressionConfig,
    gateway: ScorerGateway,
    backend: str,
    variant: str = "full",
) -> tuple[CompressionResult, Prompt]:
    prompt, units = record_to_prompt(record)
    if variant == "token_only":
        return (
            token_level_compress(prompt, config, gateway, backend, unit_hints=units),
            prompt,
        )
    cfg = variant_config(config, variant)
    return compress(prompt, cfg, gateway, backend, unit_hints=units), prompt


def measure_compression(
    records: Iterable[EvalRecord],
    config: CompressionConfig,
    gateway: ScorerGateway | None = None,
    backend: str = "uniform",
    client: GenerationClient | None = None,
    jobs: int = 1,
    variant: str = "full",
) -> EvalReport:
    """Compress every record, timing each, and aggregate the results.

    Scorer failures are recorded per record and the run continues.
    """
    gateway = gateway or ScorerGateway()
    records = list(records)

    def run_one(record: EvalRecord) -> RecordRow:
        timing = _TimingGateway(gateway)
        t0 = time.perf_counter()
        try:
            result, prompt = compress_record(record, config, timing, backend, variant)
        except Exception as exc:  # noqa: BLE001 - per-record fault isolation
            return RecordRow(
                id=record.id,
                original_tokens=0,
                compressed_tokens=0,
                compression_latency_ms=0.0,
                scorer_latency_ms=0.0,
                metric_value=None,
                error=f"{type(exc).__name__}: {exc}",
            )
        latency_ms = (time.perf_counter() - t0) * 1e3
        metric = None
        if client is not None and record.answers:
            full_prompt = build_prompt_text(
                record.task_tag, result.compressed_context, record.question
            )
            metric = float(span_em(client.generate(full_prompt), list(record.answers)))
        return RecordRow(
            id=record.id,
            original_tokens=result.original_tokens,
            compressed_tokens=result.compressed_tokens,
            compression_latency_ms=latency_ms,
            scorer_latency_ms=timing.elapsed_s * 1e3,
            metric_value=metric,
        )

    if jobs <= 1:
        rows = [run_one(r) for r in records]
    else:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(run_one, records))

    report = EvalReport(
        rows=tuple(rows),
        tokenizer_name=config.tokenizer,
        config={
            "target_tokens": config.target_tokens,
            "rho": config.rho,
            "gamma": config.gamma,
            "pooling": config.pooling,
            "ordering": config.ordering,
            "max_chunk_tokens": config.max_chunk_tokens,
            "tokenizer": config.tokenizer,
            "backend": backend,
            "variant": variant,
        },
    )
    return report.recompute_aggregates()


def write_report(report: EvalReport, out_dir: str | Path) -> tuple[Path, Path]:
    """Write rows.csv plus summary.json; returns both paths."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    rows_path = out / "rows.csv"
    with rows_path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(REPORT_COLUMNS)
        for r in report.rows:
            writer.writerow(
                [
                    r.id,
                    r.original_tokens,
                    r.compressed_tokens,
                    f"{r.ratio:.6f}",
                    f"{r.compression_latency_ms:.3f}",
                    f"{r.scorer_latency_ms:.3f}",
                    "" if r.metric_value is None else r.metric_value,
                    r.error,
                ]
            )
    summary_path = out / "summary.json"
    summary = {
        "records": len(report.rows),
        "errors": report.errors,
        "tokenizer": report.tokenizer_name,
        "config": dict(report.config),
        "mean_ratio": report.mean_ratio,
        "mean_compression_latency_ms": report.mean_latency_ms,
        "mean_scorer_latency_ms": report.mean_scorer_latency_ms,
        "metric_mean": report.metric_mean,
    }
    summary_path.write_text(json.dumps(summary, indent=2) + "\n", encoding="utf-8")
    return rows_path, summary_path
