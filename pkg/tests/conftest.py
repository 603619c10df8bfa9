from pathlib import Path

import pytest

from cluspr.corpus import index_keywords, read_token_file

DATA = Path(__file__).parent / "data"
KEY = b"fixture-key"

# Table A of the worked example: five tokens over six documents.
TABLE_A_TERMS = ["book", "solve", "traffic", "net", "enter"]
TABLE_A = [
    [30, 0, 23, 4, 40, 0],
    [5, 0, 0, 60, 34, 0],
    [0, 23, 0, 30, 0, 0],
    [52, 49, 0, 23, 0, 26],
    [0, 45, 68, 0, 3, 5],
]


@pytest.fixture
def key():
    return KEY


@pytest.fixture
def table_a():
    """(index, keymap, term -> token) for the worked example."""
    index, keymap = index_keywords(read_token_file(DATA / "table_a.jsonl"), KEY)
    return index, keymap, {term: tok for tok, term in keymap.items()}
