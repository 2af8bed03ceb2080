import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from proxrestart import CsrMatrix, QuadraticObjective  # noqa: E402


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def small_quadratic(rng):
    """A tiny well-posed least-squares instance for solver tests."""
    A = rng.standard_normal((24, 6))
    x_true = rng.standard_normal(6)
    b = A @ x_true + 0.1 * rng.standard_normal(24)
    return QuadraticObjective(CsrMatrix.from_dense(A), b)
