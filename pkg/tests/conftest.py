# tests/conftest.py

import os
import sys

import numpy as np
import pytest

# make the project root importable (so both src/ and config/ work)
ROOT = os.path.abspath(os.path.join(os.path.dirname(__file__), ".."))
sys.path.insert(0, ROOT)

from src.algebra.loops_core import CayleyTable, Loop  # noqa: E402
from src.extractors.presets import load_preset  # noqa: E402

# smallest non-associative loop; every element is its own inverse
NONASSOC5 = [
    [0, 1, 2, 3, 4],
    [1, 0, 3, 4, 2],
    [2, 4, 0, 1, 3],
    [3, 2, 4, 0, 1],
    [4, 3, 1, 2, 0],
]


def pytest_configure(config):
    for marker in (
        "integration: end-to-end runs through the CLI dispatcher",
        "unit: fast, isolated tests",
        "slow: exhaustive enumeration or large Hopf checks",
    ):
        config.addinivalue_line("markers", marker)


@pytest.fixture
def z2():
    return load_preset("Z2")


@pytest.fixture
def z3():
    return load_preset("Z3")


@pytest.fixture
def klein():
    return load_preset("klein")


@pytest.fixture
def s3():
    return load_preset("S3")


@pytest.fixture
def odd_loop():
    """Z3 ×_φ Z2 with φ(1, 1) = 1 and its J."""
    return load_preset("odd-z3z2")


@pytest.fixture
def nonassoc5():
    return Loop(CayleyTable(np.array(NONASSOC5)), 0)


@pytest.fixture
def temp_sqlite_db(tmp_path):
    """File-backed SQLite URL under pytest's tmp_path."""
    return f"sqlite:///{tmp_path / 'corpus.db'}"


@pytest.fixture
def write_file(tmp_path):
    """Write text to a file under tmp_path and return its path as a string."""

    def _write(name: str, text: str) -> str:
        path = tmp_path / name
        path.write_text(text, encoding="utf-8")
        return str(path)

    return _write
