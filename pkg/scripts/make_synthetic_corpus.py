"""Generate a synthetic retrieval-style JSONL corpus for compression runs.

Each record carries a question, a dummy answer and N passages of regular
sentence structure, so budget arithmetic is easy to reason about.

    python scripts/make_synthetic_corpus.py corpus.jsonl --records 20 --passages 80
"""

from __future__ import annotations

import argparse
import json
import random
from pathlib import Path


def make_passage(rng: random.Random, rec: int, unit: int, sentences: int, tokens: int) -> str:
    sents = []
    for s in range(sentences):
        words = [f"r{rec}u{unit}s{s}w{j}" for j in range(tokens)]
        words[-1] += "."
        sents.append(" ".join(words))
    return " ".join(sents)


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("output")
    parser.add_argument("--records", type=int, default=20)
    parser.add_argument("--passages", type=int, default=80)
    parser.add_argument("--sentences", type=int, default=25)
    parser.add_argument("--tokens-per-sentence", type=int, default=5)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    rng = random.Random(args.seed)
    rows = []
    for rec in range(args.records):
        ctxs = [
            {
                "title": f"Passage {rec}-{u}",
                "text": make_passage(rng, rec, u, args.sentences, args.tokens_per_sentence),
            }
            for u in range(args.passages)
        ]
        rows.append(
            {
                "id": f"syn-{rec}",
                "question": f"r{rec}u{rng.randrange(args.passages)}s0w0",
                "answers": [f"answer {rec}"],
                "ctxs": ctxs,
            }
        )
    Path(args.output).write_text(
        "\n".join(json.dumps(r) for r in rows) + "\n", encoding="utf-8"
    )
    print(f"wrote {len(rows)} records to {args.output}")


if __name__ == "__main__":
    main()
