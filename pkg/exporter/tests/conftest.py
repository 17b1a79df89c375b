import pytest

from fidattn.model import AttentionExporter


@pytest.fixture(scope="session")
def exporter() -> AttentionExporter:
    return AttentionExporter(checkpoint="tiny:0", max_source_tokens=48, max_chunks=32)


@pytest.fixture(scope="session")
def sample_chunks() -> list[str]:
    return [
        "The first passage talks about harbours and tide tables in winter.",
        "A second passage, with punctuation! It has two sentences.",
        "Third passage mentions the answer string everyone wants to find here.",
    ]
