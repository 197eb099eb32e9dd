import numpy as np
import pytest

from blochlab import ScaledParams, SpatialGrid, default_grid


@pytest.fixture(scope="session")
def params():
    return ScaledParams()


@pytest.fixture(scope="session")
def grid():
    return default_grid()


@pytest.fixture(scope="session")
def fine_grid():
    """Small, finely resolved grid (128 doubled periods, dx = pi/8):
    fast to propagate and fine enough for spectral-residual checks."""
    return SpatialGrid(4096, -256 * np.pi, 256 * np.pi)


@pytest.fixture(scope="session")
def battery():
    from blochlab.acceptance import Battery
    return Battery(quick=False)
