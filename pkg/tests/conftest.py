import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from mhdvac.state import EosModel, GridSpec, PhysicsParams


@pytest.fixture
def eos():
    return EosModel()


@pytest.fixture
def params():
    return PhysicsParams(epsilon=0.1, s_tension=0.1)


@pytest.fixture
def small_grid():
    return GridSpec(nx1=10, nx2=10, nx3=8, L1=4.0)


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


def random_hyperbolic_states(rng, n, spread=1.0):
    """Batch of hyperbolic fluid states with comfortable pressure margins."""
    from mhdvac.state import FluidState

    H = spread * rng.normal(size=(3, n))
    q = 0.5 * np.sum(H * H, axis=0) + rng.uniform(0.2, 2.0, size=n)
    return FluidState(
        q=q,
        v=spread * rng.normal(size=(3, n)),
        H=H,
        S=0.3 * rng.normal(size=n),
    )
