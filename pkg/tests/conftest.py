import sys
from pathlib import Path

import pytest
from hypothesis import settings

sys.path.insert(0, str(Path(__file__).parent))

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")

from formal_torsion.scalar_arith import PrimeConfig  # noqa: E402


@pytest.fixture
def cfg3():
    return PrimeConfig(3, 1, 8)


@pytest.fixture
def cfg5():
    return PrimeConfig(5, 1, 8)
