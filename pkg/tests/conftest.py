import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from pdgldpc import BaseMatrix, hamming

settings.register_profile("default", max_examples=60, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture(scope="session")
def h74():
    return hamming(3)


@pytest.fixture(scope="session")
def h1511():
    return hamming(4)


def random_base(rng, n_c, n_v, max_deg=4, p2=0.5):
    """Random base matrix with every row of degree >= 2 and column degrees in [1, max_deg]."""
    for _ in range(10000):
        B = np.zeros((n_c, n_v), dtype=np.int64)
        for j in range(n_v):
            d = 2 if rng.random() < p2 else int(rng.integers(1, max_deg + 1))
            for _ in range(d):
                B[rng.integers(n_c), j] += 1
        if (B.sum(axis=1) >= 2).all():
            return BaseMatrix(B)
    raise ValueError(f"could not draw a valid {n_c}x{n_v} base matrix")
