"""Pytest configuration for dproc tests."""
import sys
from pathlib import Path

import pytest

# Add src to Python path
src_path = Path(__file__).parent.parent / "src"
sys.path.insert(0, str(src_path))

from dproc.data_objects import make_process  # noqa: E402
from dproc.dsl import load_spec  # noqa: E402
from dproc.templates import notsucc, prec, resp, succ  # noqa: E402

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture
def fixtures_dir() -> Path:
    return FIXTURES


@pytest.fixture
def simple_five():
    """Five activities with resp, prec, succ and notsucc constraints."""
    return make_process(
        [1, 2, 3, 4, 5],
        [resp(1, 2), prec(2, 3), prec(3, 5), succ(1, 4), notsucc(4, 2)],
        name="simple_five",
    )


@pytest.fixture
def ad1_system():
    return load_spec(FIXTURES / "after_dinner_1.dproc").to_system()


@pytest.fixture
def ad2_system():
    return load_spec(FIXTURES / "after_dinner_2.dproc").to_system()
