import sys
from pathlib import Path

import numpy as np
import pytest

# Add src to path so the tests run without an install
src_dir = Path(__file__).resolve().parent.parent / "src"
if str(src_dir) not in sys.path:
    sys.path.insert(0, str(src_dir))

SEEDS = list(range(100))


@pytest.fixture
def rng():
    return np.random.Generator(np.random.PCG64(12345))


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))
