"""Segmentation: chunking rules, sentence splitting, reconstruction."""

import pytest
from hypothesis import given, settings, strategies as st

from promptpress.errors import ValidationError
from promptpress.model import CompressionConfig
from promptpress.segment import segment_context, sentence_spans, split_sentences
from promptpress.tokenization import get_counter

WS = get_counter("whitespace")


def cfg(max_chunk_tokens=128):
    return CompressionConfig(target_tokens=0, max_chunk_tokens=max_chunk_tokens)


def words(n, tag="w"):
    return " ".join(f"{tag}{i}" for i in range(n))


class TestChunking:
    def test_three_small_paragraphs_one_chunk_each(self):
        paragraphs = [words(20, f"p{k}_") for k in range(3)]
        chunks = segment_context("\n\n".join(paragraphs), cfg())
        assert [c.text for c in chunks] == paragraphs
        assert [c.index_original for c in chunks] == [0, 1, 2]

    def test_unit_hints_boundaries_respected(self):
        hints = [words(20, f"p{k}_") for k in range(3)]
        chunks = segment_context("\n".join(hints), cfg(), unit_hints=hints)
        assert [c.text for c in chunks] == hints

    def test_twenty_passages_give_twenty_chunks(self):
        # Retrieval-style record: 20 passages, each under the cap.
        hints = [f"Document [{k}](Title: t{k}) " + words(90) for k in range(1, 21)]
        chunks = segment_context("\n".join(hints), cfg(), unit_hints=hints)
        assert len(chunks) == 20
        assert all(c.token_count <= 128 for c in chunks)

    def test_greedy_line_packing_hand_trace(self):
        # One paragraph, a line break every 100 tokens: lines cannot pair up
        # under the 128 cap, so greedy packing yields 3 chunks of 100.
        paragraph = "\n".join(words(100, f"l{k}_") for k in range(3))
        chunks = segment_context(paragraph, cfg())
        assert [c.token_count for c in chunks] == [100, 100, 100]
        assert not any(c.hard_split for c in chunks)

    def test_greedy_packing_pairs_lines_when_they_fit(self):
        paragraph = "\n".join(words(60, f"l{k}_") for k in range(3))
        chunks = segment_context(paragraph, cfg())
        assert [c.token_count for c in chunks] == [120, 60]

    def test_overlong_line_hard_split_and_flagged(self):
        line = words(300)
        chunks = segment_context(line, cfg())
        assert [c.token_count for c in chunks] == [128, 128, 44]
        assert all(c.hard_split for c in chunks)

    def test_cap_invariant(self):
        text = "\n\n".join(words(50, f"p{k}_") for k in range(10))
        for c in segment_context(text, cfg(max_chunk_tokens=64)):
            assert c.token_count <= 64 or c.hard_split

    def test_oversized_hint_splits_internally(self):
        big = "\n".join(words(50, f"h0l{k}_") for k in range(4))  # 200 tokens
        small = words(10, "h1_")
        chunks = segment_context(big + "\n" + small, cfg(), unit_hints=[big, small])
        assert [c.token_count for c in chunks] == [100, 100, 10]
        # no chunk mixes content from both hints
        assert all("h1_" not in c.text for c in chunks[:2])
        assert "h0l" not in chunks[2].text

    def test_empty_context_rejected(self):
        with pytest.raises(ValidationError):
            segment_context("   \n ", cfg())

    def test_reconstruction_modulo_whitespace(self):
        text = "first line\nsecond line\n\nnew paragraph here. more text!\nlast line"
        chunks = segment_context(text, cfg())
        assert " ".join("\n".join(c.text for c in chunks).split()) == " ".join(text.split())

    def test_resegmentation_is_idempotent(self):
        text = "\n\n".join(words(90, f"p{k}_") for k in range(4))
        first = segment_context(text, cfg())
        again = segment_context("\n\n".join(c.text for c in first), cfg())
        assert [c.text for c in again] == [c.text for c in first]

    @settings(max_examples=50)
    @given(
        st.lists(
            st.integers(min_value=1, max_value=40).map(lambda n: words(n)),
            min_size=1,
            max_size=8,
        )
    )
    def test_determinism_and_order(self, paragraphs):
        text = "\n\n".join(paragraphs)
        a = segment_context(text, cfg(max_chunk_tokens=16))
        b = segment_context(text, cfg(max_chunk_tokens=16))
        assert a == b
        assert [c.index_original for c in a] == list(range(len(a)))


class TestSentenceSplitting:
    def test_terminal_punctuation(self):
        spans = sentence_spans("A. B? C!")
        texts = ["A. B? C!"[a:b].strip() for a, b in spans]
        assert texts == ["A.", "B?", "C!"]

    def test_abbreviation_not_a_boundary(self):
        assert len(sentence_spans("Mr. Smith went home.")) == 1
        assert len(sentence_spans("See fig. 4 for details. Then stop.")) == 2

    def test_no_punctuation_one_sentence(self):
        code = "def f(x):\n    return x + 1"
        assert sentence_spans(code) == [(0, len(code))]

    def test_decimal_numbers_not_boundaries(self):
        assert len(sentence_spans("It rose 3.14 percent. Then it fell.")) == 2

    def test_spans_tile_without_overlap(self):
        text = "One sentence here. Another one? Yes! And a trailing bit"
        spans = sentence_spans(text)
        assert spans[0][0] == 0
        assert spans[-1][1] == len(text)
        for (_, e1), (s2, _) in zip(spans, spans[1:]):
            assert e1 == s2

    def test_sentence_token_counts_partition_chunk(self, bpe_name):
        text = "The clerk read it aloud. Mr. Ellery listened. Then the bell rang twice!"
        chunks = segment_context(text, cfg())
        for name in ("whitespace", bpe_name):
            counter = get_counter(name)
            sentences = split_sentences(chunks[0], counter)
            assert sum(s.token_count for s in sentences) == counter.count(text)

    @settings(max_examples=60)
    @given(st.text(alphabet=st.sampled_from(" .!?abcDEF\n'\")"), min_size=1, max_size=120))
    def test_partition_property(self, bpe_name, text):
        if not text.strip():
            return
        chunks = segment_context(text, cfg())
        for name in ("whitespace", bpe_name):
            counter = get_counter(name)
            for chunk in chunks:
                sentences = split_sentences(chunk, counter)
                assert sum(s.token_count for s in sentences) == chunk_count(chunk, counter)
                spans = [s.char_span for s in sentences]
                assert all(e1 <= s2 for (_, e1), (s2, _) in zip(spans, spans[1:]))
                assert len(sentences) >= 1


def chunk_count(chunk, counter):
    return counter.count(chunk.text)
