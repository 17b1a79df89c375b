import json
from pathlib import Path

import pytest

DATA_DIR = Path(__file__).parent / "data"


@pytest.fixture(scope="session")
def data_dir() -> Path:
    return DATA_DIR


@pytest.fixture(scope="session")
def sample_text() -> str:
    return (DATA_DIR / "sample_1k.txt").read_text(encoding="utf-8")


@pytest.fixture(scope="session")
def golden_counts() -> dict:
    return json.loads((DATA_DIR / "golden_counts.json").read_text(encoding="utf-8"))


@pytest.fixture(scope="session")
def bpe_name() -> str:
    return f"bpe:{DATA_DIR / 'bpe'}"
