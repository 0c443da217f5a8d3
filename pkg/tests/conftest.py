import functools
import math

import numpy as np
import pytest

from expandolab import acim, maps

LOG2 = math.log(2.0)


@functools.lru_cache(maxsize=None)
def density(family: str, t: float, k: int = 256):
    """Exact-Ulam stationary density, cached across test modules."""
    m = maps.make_family(family, t)
    return acim.stationary_density(acim.build_ulam(m, acim.build_grid(m, k)))


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
