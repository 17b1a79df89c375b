"""Fusion-in-decoder attention capture.

Each chunk is encoded independently with the question prepended; all encoder
outputs are concatenated into one key-value memory and a single decoder step
is run from the decoder start token. The captured cross-attention weights
form one softmax distribution per (layer, head) over the concatenated
positions (global normalization across chunks). Attention is taken
post-softmax as exposed by the runtime at inference; dropout is disabled.

Token-level importance is the sum of those weights over all layers and
heads. Question, framing, and special positions are tracked in the offset
table and excluded from served spans.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, field

import torch

from .tokenizer import WordOffsetTokenizer

QUESTION_FRAMING = "question: {question} context: "

KIND_CONTEXT = "context"
KIND_QUESTION = "question"
KIND_SPECIAL = "special"
KIND_PAD = "pad"


@dataclass(frozen=True)
class TokenSlot:
    """One position of the concatenated key sequence."""

    chunk_index: int
    kind: str
    char_start: int = -1  # offsets into the chunk text, context tokens only
    char_end: int = -1


@dataclass
class CrossAttentionTensor:
    """Per-(layer, head) attention over the concatenated K*M positions."""

    values: torch.Tensor  # (L, H, K*M), float32
    layers: int
    heads: int
    chunk_count: int
    sequence_length: int  # M after padding
    slots: list[TokenSlot]
    truncated_chunks: list[int] = field(default_factory=list)

    def token_scores(self) -> torch.Tensor:
        """Importance per position: sum over layers and heads (float64)."""
        return self.values.double().sum(dim=(0, 1))


class AttentionExporter:
    """Wraps a seq2seq checkpoint and captures first-step cross-attention.

    ``checkpoint`` is either a directory loadable by ``from_pretrained`` or
    ``tiny:<seed>`` for a small randomly initialized model with the built-in
    word tokenizer (test and debug profile; scores are meaningless but the
    attention plumbing is identical).
    """

    def __init__(
        self,
        checkpoint: str = "tiny:0",
        device: str = "cpu",
        max_source_tokens: int = 192,
        max_chunks: int = 64,
    ):
        self.checkpoint = checkpoint
        self.device = torch.device(device)
        self.max_source_tokens = max_source_tokens
        self.max_chunks = max_chunks
        self._lock = threading.Lock()  # serial inference, per-request isolation
        if checkpoint.startswith("tiny:"):
            self._init_tiny(int(checkpoint.split(":", 1)[1]))
        else:
            self._init_pretrained(checkpoint)
        self.model.eval()
        self.layers = self.model.config.num_decoder_layers
        self.heads = self.model.config.num_heads

    def _init_tiny(self, seed: int) -> None:
        from transformers import T5Config, T5ForConditionalGeneration

        torch.manual_seed(seed)
        config = T5Config(
            vocab_size=512,
            d_model=32,
            d_kv=8,
            d_ff=64,
            num_layers=2,
            num_decoder_layers=2,
            num_heads=4,
            relative_attention_num_buckets=8,
            dropout_rate=0.0,
            decoder_start_token_id=0,
            pad_token_id=0,
            eos_token_id=1,
        )
        self.model = T5ForConditionalGeneration(config).to(self.device)
        self.tokenizer = WordOffsetTokenizer(vocab_size=512)
        self._encode = self._encode_word_level

    def _init_pretrained(self, path: str) -> None:
        from transformers import AutoTokenizer, T5ForConditionalGeneration

        self.model = T5ForConditionalGeneration.from_pretrained(path).to(self.device)
        self.model.config.dropout_rate = 0.0
        self.tokenizer = AutoTokenizer.from_pretrained(path, use_fast=True)
        self._encode = self._encode_subword

    def _encode_word_level(self, text: str):
        enc = self.tokenizer.encode(text, max_length=self.max_source_tokens)
        return enc.ids, enc.offsets, enc.special

    def _encode_subword(self, text: str):
        enc = self.tokenizer(
            text,
            truncation=True,
            max_length=self.max_source_tokens,
            return_offsets_mapping=True,
        )
        ids = enc["input_ids"]
        special_ids = set(self.tokenizer.all_special_ids)
        offsets = []
        special = []
        for tid, (a, b) in zip(ids, enc["offset_mapping"]):
            is_special = tid in special_ids or a == b
            offsets.append((-1, -1) if is_special else (a, b))
            special.append(is_special)
        return ids, offsets, special

    def encode_and_attend(self, question: str, chunks: list[str]) -> CrossAttentionTensor:
        """Run one decoding step over all chunks and capture cross-attention."""
        if not chunks:
            raise ValueError("at least one chunk is required")
        if len(chunks) > self.max_chunks:
            raise ValueError(
                f"request has {len(chunks)} chunks, exporter cap is {self.max_chunks}"
            )
        prefix = QUESTION_FRAMING.format(question=question)
        prefix_len = len(prefix)

        per_chunk = []
        truncated = []
        for ci, chunk in enumerate(chunks):
            ids, offsets, special = self._encode(prefix + chunk)
            if self._was_truncated(prefix + chunk, ids):
                truncated.append(ci)
            slots = []
            for (a, b), is_special in zip(offsets, special):
                if is_special:
                    slots.append(TokenSlot(ci, KIND_SPECIAL))
                elif a >= prefix_len:
                    slots.append(TokenSlot(ci, KIND_CONTEXT, a - prefix_len, b - prefix_len))
                else:
                    # tokens of the question/framing prefix (a token straddling
                    # the boundary counts as question, by first character)
                    slots.append(TokenSlot(ci, KIND_QUESTION))
            per_chunk.append((ids, slots))

        seq_len = max(len(ids) for ids, _ in per_chunk)
        batch_ids = torch.full(
            (len(chunks), seq_len), self.model.config.pad_token_id, dtype=torch.long
        )
        batch_mask = torch.zeros((len(chunks), seq_len), dtype=torch.long)
        all_slots: list[TokenSlot] = []
        for ci, (ids, slots) in enumerate(per_chunk):
            batch_ids[ci, : len(ids)] = torch.tensor(ids, dtype=torch.long)
            batch_mask[ci, : len(ids)] = 1
            all_slots.extend(slots)
            all_slots.extend(TokenSlot(ci, KIND_PAD) for _ in range(seq_len - len(ids)))

        with self._lock, torch.no_grad():
            encoder_out = self.model.encoder(
                input_ids=batch_ids.to(self.device),
                attention_mask=batch_mask.to(self.device),
            )
            hidden = encoder_out.last_hidden_state  # (K, M, h)
            memory = hidden.reshape(1, len(chunks) * seq_len, -1)
            memory_mask = batch_mask.reshape(1, -1).to(self.device)
            decoder_out = self.model.decoder(
                input_ids=torch.tensor(
                    [[self.model.config.decoder_start_token_id]], device=self.device
                ),
                encoder_hidden_states=memory,
                encoder_attention_mask=memory_mask,
                output_attentions=True,
            )
        # L tensors of (1, H, 1, K*M) -> (L, H, K*M)
        attention = torch.stack(
            [a[0, :, 0, :].cpu() for a in decoder_out.cross_attentions]
        )
        return CrossAttentionTensor(
            values=attention,
            layers=attention.shape[0],
            heads=attention.shape[1],
            chunk_count=len(chunks),
            sequence_length=seq_len,
            slots=all_slots,
            truncated_chunks=truncated,
        )

    def _was_truncated(self, text: str, ids: list[int]) -> bool:
        if len(ids) < self.max_source_tokens:
            return False
        full = self._probe_full_length(text)
        return full > self.max_source_tokens

    def _probe_full_length(self, text: str) -> int:
        if isinstance(self.tokenizer, WordOffsetTokenizer):
            return len(self.tokenizer.encode(text).ids)
        return len(self.tokenizer(text)["input_ids"])

    def score_chunks(
        self, question: str, chunks: list[str], debug_raw: bool = False
    ) -> tuple[list[list[dict]], dict]:
        """Aggregate to per-chunk span lists (byte offsets, summed scores).

        Summation over layers and heads happens here; the raw per-(layer,
        head) tensor rides along only when ``debug_raw`` is set (it is L*H
        times the span payload).
        """
        tensor = self.encode_and_attend(question, chunks)
        scores = tensor.token_scores()
        per_chunk: list[list[dict]] = [[] for _ in chunks]
        byte_maps = [_char_to_byte_map(c) for c in chunks]
        for pos, slot in enumerate(tensor.slots):
            if slot.kind != KIND_CONTEXT:
                continue
            b2 = byte_maps[slot.chunk_index]
            per_chunk[slot.chunk_index].append(
                {
                    "start": b2[slot.char_start],
                    "end": b2[slot.char_end],
                    "score": float(scores[pos]),
                }
            )
        meta = {
            "backend": "fid-attention",
            "checkpoint": self.checkpoint,
            "layers": tensor.layers,
            "heads": tensor.heads,
            "sequence_length": tensor.sequence_length,
            "chunk_count": tensor.chunk_count,
            "truncated_chunks": tensor.truncated_chunks,
            "framing": QUESTION_FRAMING,
        }
        if debug_raw:
            meta["raw_attention"] = tensor.values.tolist()
        return per_chunk, meta


def _char_to_byte_map(text: str) -> list[int]:
    out = [0] * (len(text) + 1)
    total = 0
    for i, ch in enumerate(text):
        out[i] = total
        total += len(ch.encode("utf-8"))
    out[len(text)] = total
    return out
