"""
Shared fixtures for the thin-traces test suite
"""
import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).resolve().parent.parent))

from modules.semigroup import Alphabet  # noqa: E402


@pytest.fixture
def ones():
    return Alphabet((1,))


@pytest.fixture
def one_two():
    return Alphabet((1, 2))


@pytest.fixture
def twos():
    return Alphabet((2,))


@pytest.fixture
def one_to_ten():
    return Alphabet.range(10)


@pytest.fixture
def output_dir(tmp_path):
    out = tmp_path / 'output'
    out.mkdir()
    return out
