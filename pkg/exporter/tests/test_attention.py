"""Attention capture: normalization, offset table, truncation, framing."""

import torch

from fidattn.model import KIND_CONTEXT, KIND_PAD, KIND_QUESTION, KIND_SPECIAL
from fidattn.tokenizer import WordOffsetTokenizer


class TestTokenizer:
    def test_offsets_cover_words(self):
        tok = WordOffsetTokenizer()
        enc = tok.encode("alpha  beta\ngamma")
        words = ["alpha", "beta", "gamma"]
        spans = [s for s, special in zip(enc.offsets, enc.special) if not special]
        assert ["alpha  beta\ngamma"[a:b] for a, b in spans] == words
        assert enc.ids[-1] == tok.eos_id

    def test_ids_stable_across_instances(self):
        a = WordOffsetTokenizer().encode("same words here").ids
        b = WordOffsetTokenizer().encode("same words here").ids
        assert a == b


class TestEncodeAndAttend:
    def test_softmax_rows_sum_to_one(self, exporter, sample_chunks):
        tensor = exporter.encode_and_attend("what is the answer", sample_chunks)
        sums = tensor.values.sum(dim=-1)
        assert torch.allclose(sums, torch.ones_like(sums), atol=1e-4)

    def test_single_chunk_rows_sum_to_one(self, exporter):
        tensor = exporter.encode_and_attend("", ["only one chunk present"])
        sums = tensor.values.sum(dim=-1)
        assert torch.allclose(sums, torch.ones_like(sums), atol=1e-4)

    def test_offset_table_shape_and_kinds(self, exporter, sample_chunks):
        tensor = exporter.encode_and_attend("the question", sample_chunks)
        assert len(tensor.slots) == tensor.chunk_count * tensor.sequence_length
        kinds = {s.kind for s in tensor.slots}
        assert kinds <= {KIND_CONTEXT, KIND_QUESTION, KIND_SPECIAL, KIND_PAD}
        # question/framing tokens exist and carry no chunk offsets
        q_slots = [s for s in tensor.slots if s.kind == KIND_QUESTION]
        assert q_slots and all(s.char_start == -1 for s in q_slots)

    def test_context_slots_map_into_chunk_text(self, exporter, sample_chunks):
        tensor = exporter.encode_and_attend("q", sample_chunks)
        for slot in tensor.slots:
            if slot.kind != KIND_CONTEXT:
                continue
            text = sample_chunks[slot.chunk_index]
            piece = text[slot.char_start : slot.char_end]
            assert piece and not piece[0].isspace() and not piece[-1].isspace()

    def test_empty_question_still_valid(self, exporter, sample_chunks):
        tensor = exporter.encode_and_attend("", sample_chunks)
        sums = tensor.values.sum(dim=-1)
        assert torch.allclose(sums, torch.ones_like(sums), atol=1e-4)
        assert any(s.kind == KIND_CONTEXT for s in tensor.slots)
        # framing tokens remain even with no question text
        assert any(s.kind == KIND_QUESTION for s in tensor.slots)

    def test_truncation_flagged(self, exporter):
        long_chunk = " ".join(f"w{i}" for i in range(500))
        tensor = exporter.encode_and_attend("q", ["short chunk", long_chunk])
        assert tensor.truncated_chunks == [1]

    def test_determinism(self, exporter, sample_chunks):
        a = exporter.encode_and_attend("q", sample_chunks)
        b = exporter.encode_and_attend("q", sample_chunks)
        assert torch.equal(a.values, b.values)
        assert a.slots == b.slots


class TestServedSpans:
    def test_spans_cover_every_context_token_once(self, exporter, sample_chunks):
        per_chunk, meta = exporter.score_chunks("the question", sample_chunks)
        for text, spans in zip(sample_chunks, per_chunk):
            raw = text.encode("utf-8")
            # non-overlapping, sorted, in range
            prev_end = 0
            for s in spans:
                assert 0 <= s["start"] < s["end"] <= len(raw)
                assert s["start"] >= prev_end
                prev_end = s["end"]
            # gaps between spans are whitespace only: spans reconstruct the text
            rebuilt = bytearray(b" " * len(raw))
            for s in spans:
                rebuilt[s["start"] : s["end"]] = raw[s["start"] : s["end"]]
            assert bytes(rebuilt).split() == raw.split()
        assert meta["layers"] == exporter.layers
        assert meta["checkpoint"] == "tiny:0"

    def test_scores_nonnegative(self, exporter, sample_chunks):
        per_chunk, _ = exporter.score_chunks("q", sample_chunks)
        assert all(s["score"] >= 0 for spans in per_chunk for s in spans)

    def test_multibyte_chunks_use_byte_offsets(self, exporter):
        chunk = "café au lait"
        per_chunk, _ = exporter.score_chunks("", [chunk])
        raw = chunk.encode("utf-8")
        assert [raw[s["start"] : s["end"]].decode("utf-8") for s in per_chunk[0]] == [
            "café",
            "au",
            "lait",
        ]

    def test_context_mass_bounded_per_row(self, exporter, sample_chunks):
        # each (layer, head) row is a softmax over ALL positions including
        # question/special, so its context-position subset sums to <= 1
        tensor = exporter.encode_and_attend("some question", sample_chunks)
        context_idx = [
            pos for pos, slot in enumerate(tensor.slots) if slot.kind == KIND_CONTEXT
        ]
        subset = tensor.values[:, :, context_idx].sum(dim=-1)
        assert (subset <= 1.0 + 1e-6).all()
        # summed over layers and heads, served spans carry exactly that mass
        per_chunk, _ = exporter.score_chunks("some question", sample_chunks)
        served = sum(s["score"] for spans in per_chunk for s in spans)
        assert abs(served - float(subset.double().sum())) < 1e-6
        assert served <= exporter.layers * exporter.heads + 1e-6

    def test_missing_checkpoint_errors(self, tmp_path):
        from fidattn.model import AttentionExporter

        try:
            AttentionExporter(checkpoint=str(tmp_path / "nowhere"))
        except (OSError, ValueError, EnvironmentError):
            pass
        else:
            raise AssertionError("expected a load error")

    def test_chunk_cap_enforced(self, exporter):
        chunks = ["c"] * (exporter.max_chunks + 1)
        try:
            exporter.encode_and_attend("", chunks)
        except ValueError as exc:
            assert "cap" in str(exc)
        else:
            raise AssertionError("expected ValueError")
