"""Build the byte-pair test fixture under tests/data/bpe/.

Trains a small merge table on the fixed sample text and writes vocab.json +
merges.txt in the conventional two-file layout. Run once; the resulting
files and the golden token count are committed.

    python scripts/build_bpe_fixture.py tests/data/sample_1k.txt tests/data/bpe 120
"""

from __future__ import annotations

import json
import sys
from collections import Counter
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from promptpress.tokenization import _BPE_PRETOKEN, _bytes_to_unicode  # noqa: E402


def train(text: str, num_merges: int) -> tuple[list[tuple[str, str]], list[str]]:
    enc = _bytes_to_unicode()
    words = Counter(
        tuple(enc[b] for b in m.group().encode("utf-8"))
        for m in _BPE_PRETOKEN.finditer(text)
    )
    merges: list[tuple[str, str]] = []
    for _ in range(num_merges):
        pairs: Counter = Counter()
        for word, freq in words.items():
            for i in range(len(word) - 1):
                pairs[(word[i], word[i + 1])] += freq
        if not pairs:
            break
        best, freq = pairs.most_common(1)[0]
        if freq < 2:
            break
        merges.append(best)
        merged_words = Counter()
        for word, wfreq in words.items():
            out = []
            i = 0
            while i < len(word):
                if i < len(word) - 1 and (word[i], word[i + 1]) == best:
                    out.append(word[i] + word[i + 1])
                    i += 2
                else:
                    out.append(word[i])
                    i += 1
            merged_words[tuple(out)] += wfreq
        words = merged_words
    vocab = [enc[b] for b in range(256)] + [a + b for a, b in merges]
    return merges, vocab


def main() -> None:
    sample, out_dir, num = sys.argv[1], Path(sys.argv[2]), int(sys.argv[3])
    text = Path(sample).read_text(encoding="utf-8")
    merges, vocab = train(text, num)
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "merges.txt").write_text(
        "\n".join(f"{a} {b}" for a, b in merges) + "\n", encoding="utf-8"
    )
    (out_dir / "vocab.json").write_text(
        json.dumps({tok: i for i, tok in enumerate(vocab)}, ensure_ascii=False, indent=0),
        encoding="utf-8",
    )
    print(f"wrote {len(merges)} merges, vocab of {len(vocab)}")


if __name__ == "__main__":
    main()
