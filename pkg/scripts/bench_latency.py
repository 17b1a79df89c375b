"""Measure compression latency on a synthetic 10K-token prompt.

    python scripts/bench_latency.py --scorer lexical --runs 15
"""

from __future__ import annotations

import argparse
import statistics
import time

from promptpress.compress import compress
from promptpress.model import CompressionConfig, Prompt
from promptpress.scoring import ScorerGateway


def build_units(units: int = 80, sentences: int = 25, tokens: int = 5) -> list[str]:
    out = []
    for u in range(units):
        sents = []
        for s in range(sentences):
            words = [f"u{u}s{s}w{j}" for j in range(tokens)]
            words[-1] += "."
            sents.append(" ".join(words))
        out.append(" ".join(sents))
    return out


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--scorer", default="lexical", choices=("uniform", "lexical"))
    parser.add_argument("--target-tokens", type=int, default=2000)
    parser.add_argument("--runs", type=int, default=15)
    args = parser.parse_args()

    units = build_units()
    prompt = Prompt(
        instruction="", context="\n".join(units), question="u40s12w2 u71s3w1"
    )
    config = CompressionConfig(target_tokens=args.target_tokens)
    gateway = ScorerGateway()

    result = compress(prompt, config, gateway, args.scorer, unit_hints=units)
    print(
        f"prompt: {result.original_tokens} tokens -> {result.compressed_tokens} "
        f"(chunk -{result.removed_chunk_tokens}, sentence -{result.removed_sentence_tokens})"
    )

    samples = []
    for _ in range(args.runs):
        t0 = time.perf_counter()
        compress(prompt, config, gateway, args.scorer, unit_hints=units)
        samples.append((time.perf_counter() - t0) * 1e3)
    samples.sort()
    print(
        f"latency over {args.runs} runs: median {statistics.median(samples):.1f} ms, "
        f"min {samples[0]:.1f} ms, max {samples[-1]:.1f} ms"
    )


if __name__ == "__main__":
    main()
