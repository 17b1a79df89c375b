"""Command-line front end: compress prompts, inspect scores, run evaluations.

Configuration precedence is flags > environment variables > config file >
built-in defaults. The config file is flat ``key = value`` lines (``#``
comments allowed); environment variables use the ``PROMPTPRESS_`` prefix,
except the scorer endpoint which is also read from ``R2C_SCORER_ENDPOINT``.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from .compress import compress
from .datasets import load_dataset, sample_records
from .errors import PromptPressError, TransportError
from .harness import StaticClient, measure_compression, write_report
from .model import CompressionConfig, Prompt
from .remote import RemoteScorer
from .scoring import ScoreRequest, ScorerGateway

ENV_PREFIX = "PROMPTPRESS_"
ENDPOINT_ENV_VARS = ("R2C_SCORER_ENDPOINT", ENV_PREFIX + "SCORER_ENDPOINT")

_CONFIG_KEYS = {
    "target_tokens": int,
    "rho": float,
    "gamma": float,
    "pooling": str,
    "ordering": str,
    "max_chunk_tokens": int,
    "tokenizer": str,
    "scorer": str,
}


def read_config_file(path: str | Path) -> dict:
    values: dict = {}
    for line_no, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise PromptPressError(f"{path}:{line_no}: expected 'key = value'")
        key = key.strip()
        if key not in _CONFIG_KEYS:
            raise PromptPressError(f"{path}:{line_no}: unknown config key {key!r}")
        values[key] = _CONFIG_KEYS[key](value.strip())
    return values


def _env_values() -> dict:
    values: dict = {}
    for key, cast in _CONFIG_KEYS.items():
        raw = os.environ.get(ENV_PREFIX + key.upper())
        if raw is not None:
            values[key] = cast(raw)
    for var in ENDPOINT_ENV_VARS:
        raw = os.environ.get(var)
        if raw and "scorer" not in values:
            values["scorer"] = f"remote:{raw}" if not raw.startswith("remote:") else raw
    return values


def resolve_settings(args: argparse.Namespace) -> dict:
    """flags > env > config file > defaults."""
    settings = {
        "target_tokens": None,
        "rho": 0.8,
        "gamma": 1.0,
        "pooling": "mean",
        "ordering": "original",
        "max_chunk_tokens": 128,
        "tokenizer": "whitespace",
        "scorer": "uniform",
    }
    if getattr(args, "config", None):
        settings.update(read_config_file(args.config))
    settings.update(_env_values())
    for key in _CONFIG_KEYS:
        flag = getattr(args, key, None)
        if flag is not None:
            settings[key] = flag
    return settings


def build_gateway(scorer: str) -> tuple[ScorerGateway, str]:
    """Map a --scorer value to (gateway, backend name)."""
    gateway = ScorerGateway()
    if scorer.startswith("remote:"):
        endpoint = scorer[len("remote:"):]
        if not endpoint:
            for var in ENDPOINT_ENV_VARS:
                endpoint = os.environ.get(var, "")
                if endpoint:
                    break
        if not endpoint:
            raise PromptPressError(
                "remote scorer needs an endpoint: --scorer remote:URL or "
                f"{ENDPOINT_ENV_VARS[0]}"
            )
        gateway.register(RemoteScorer(endpoint))
        return gateway, "remote"
    return gateway, scorer


def _config_from_settings(settings: dict, parser: argparse.ArgumentParser) -> CompressionConfig:
    if settings["target_tokens"] is None:
        parser.error("--target-tokens is required (flag, env or config file)")
    try:
        return CompressionConfig(
            target_tokens=settings["target_tokens"],
            rho=settings["rho"],
            gamma=settings["gamma"],
            pooling=settings["pooling"],
            ordering=settings["ordering"],
            max_chunk_tokens=settings["max_chunk_tokens"],
            tokenizer=settings["tokenizer"],
        )
    except PromptPressError as exc:
        parser.error(str(exc))


def _read_prompts(args: argparse.Namespace) -> list[tuple[Prompt, list[str] | None]]:
    """Prompts from stdin (single) or a file (text or dataset rows)."""
    if args.input in (None, "-"):
        text = sys.stdin.read()
        prompt = Prompt(
            instruction=args.instruction, context=text, question=args.question
        )
        return [(prompt, None)]
    if args.format == "text":
        text = Path(args.input).read_text(encoding="utf-8")
        return [(Prompt(instruction=args.instruction, context=text, question=args.question), None)]
    out = []
    for record in load_dataset(args.input, args.format, strict=args.strict):
        from .datasets import record_to_prompt

        out.append(record_to_prompt(record))
    return out


def cmd_compress(args: argparse.Namespace, parser: argparse.ArgumentParser) -> int:
    settings = resolve_settings(args)
    config = _config_from_settings(settings, parser)
    gateway, backend = build_gateway(settings["scorer"])

    outputs = []
    audits = []
    for prompt, hints in _read_prompts(args):
        result = compress(prompt, config, gateway, backend, unit_hints=hints)
        outputs.append(result.compressed_context)
        if args.audit:
            audit = result.audit_dict()
            audit["source_id"] = prompt.source_id
            audit["effective_config"] = {**settings, "backend": backend}
            audits.append(audit)

    text = "\n\n".join(outputs) + "\n"
    if args.output and args.output != "-":
        Path(args.output).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    if args.audit:
        Path(args.audit).write_text(
            "\n".join(json.dumps(a) for a in audits) + "\n", encoding="utf-8"
        )
    return 0


def cmd_score(args: argparse.Namespace, parser: argparse.ArgumentParser) -> int:
    settings = resolve_settings(args)
    gateway, backend = build_gateway(settings["scorer"])
    text = sys.stdin.read() if args.input in (None, "-") else Path(args.input).read_text()
    config = CompressionConfig(
        target_tokens=0,
        max_chunk_tokens=settings["max_chunk_tokens"],
        tokenizer=settings["tokenizer"],
    )
    from .segment import segment_context

    chunks = segment_context(text, config)
    response = gateway.score(
        ScoreRequest(
            question=args.question, chunks=tuple(c.text for c in chunks), backend=backend
        )
    )
    payload = {
        "backend_meta": dict(response.backend_meta),
        "per_chunk": [
            [
                {"start": s.char_start, "end": s.char_end, "score": s.score}
                for s in spans
            ]
            for spans in response.per_chunk
        ],
    }
    json.dump(payload, sys.stdout, indent=2)
    sys.stdout.write("\n")
    return 0


def cmd_evaluate(args: argparse.Namespace, parser: argparse.ArgumentParser) -> int:
    settings = resolve_settings(args)
    config = _config_from_settings(settings, parser)
    gateway, backend = build_gateway(settings["scorer"])

    records = list(load_dataset(args.dataset, args.format, strict=args.strict))
    if args.limit:
        records = records[: args.limit]
    if args.sample_frac:
        records = sample_records(records, args.sample_frac, args.sample_seed)

    client = StaticClient(args.client_text) if args.client == "stub" else None
    report = measure_compression(
        records,
        config,
        gateway,
        backend,
        client=client,
        jobs=args.jobs,
        variant=args.variant,
    )
    rows_path, summary_path = write_report(report, args.report_dir)
    print(
        f"records={len(report.rows)} errors={report.errors} "
        f"mean_ratio={report.mean_ratio:.4f} "
        f"mean_latency_ms={report.mean_latency_ms:.2f} "
        f"metric_mean={report.metric_mean}"
    )
    print(f"wrote {rows_path} and {summary_path}")
    if report.rows and report.errors == len(report.rows):
        # nothing succeeded (e.g. scorer endpoint unreachable): fail the run
        print(f"error: all records failed: {report.rows[0].error}", file=sys.stderr)
        return 1
    return 0


def _add_common_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--target-tokens", dest="target_tokens", type=int, default=None)
    p.add_argument("--rho", type=_unit_interval, default=None, help="chunk-stage budget share, in [0, 1]")
    p.add_argument("--gamma", type=_nonnegative, default=None, help="inverse-importance exponent, >= 0")
    p.add_argument("--pooling", choices=("mean", "max", "sum"), default=None)
    p.add_argument("--ordering", choices=("original", "sorted"), default=None)
    p.add_argument("--max-chunk-tokens", dest="max_chunk_tokens", type=int, default=None)
    p.add_argument("--tokenizer", default=None, help="whitespace or bpe:<dir>")
    p.add_argument(
        "--scorer", default=None, help="uniform | lexical | remote:ENDPOINT"
    )
    p.add_argument("--config", default=None, help="key = value config file")
    p.add_argument("--question", default="", help="question part of the prompt")
    p.add_argument("--instruction", default="", help="instruction part of the prompt")
    p.add_argument("--strict", action=argparse.BooleanOptionalAction, default=True)


def _unit_interval(raw: str) -> float:
    value = float(raw)
    if not 0.0 <= value <= 1.0:
        raise argparse.ArgumentTypeError(f"must be in [0, 1], got {raw}")
    return value


def _nonnegative(raw: str) -> float:
    value = float(raw)
    if value < 0:
        raise argparse.ArgumentTypeError(f"must be >= 0, got {raw}")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="promptpress",
        description="Hierarchical prompt compression to a token budget.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_compress = sub.add_parser("compress", help="compress a prompt or a file of prompts")
    _add_common_flags(p_compress)
    p_compress.add_argument("--input", default=None, help="input file, or - for stdin")
    p_compress.add_argument("--output", default=None, help="output file, default stdout")
    p_compress.add_argument(
        "--format", choices=("text", "nq", "longbench"), default="text"
    )
    p_compress.add_argument("--audit", default=None, help="write a JSONL audit trail here")
    p_compress.set_defaults(func=cmd_compress)

    p_score = sub.add_parser("score", help="print per-chunk span scores as JSON")
    _add_common_flags(p_score)
    p_score.add_argument("--input", default=None, help="input file, or - for stdin")
    p_score.set_defaults(func=cmd_score)

    p_eval = sub.add_parser("evaluate", help="run compression over a dataset")
    _add_common_flags(p_eval)
    p_eval.add_argument("--dataset", required=True)
    p_eval.add_argument("--format", choices=("nq", "longbench"), required=True)
    p_eval.add_argument("--report-dir", dest="report_dir", default="reports")
    p_eval.add_argument("--jobs", type=int, default=1)
    p_eval.add_argument("--limit", type=int, default=0)
    p_eval.add_argument("--sample-frac", dest="sample_frac", type=float, default=0.0)
    p_eval.add_argument("--sample-seed", dest="sample_seed", type=int, default=0)
    p_eval.add_argument(
        "--variant",
        choices=("full", "chunk_only", "sentence_only", "token_only"),
        default="full",
    )
    p_eval.add_argument("--client", choices=("none", "stub"), default="none")
    p_eval.add_argument("--client-text", dest="client_text", default="")
    p_eval.set_defaults(func=cmd_evaluate)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args, parser)
    except TransportError as exc:
        print(
            f"error: {exc} (endpoint={exc.endpoint}, attempts={exc.attempts})",
            file=sys.stderr,
        )
        return 1
    except PromptPressError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
