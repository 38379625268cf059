import numpy as np
import pytest

from toriclab import enumeration, geometry


@pytest.fixture(scope="session")
def rotated4():
    return geometry.build_geometry("rotated", 4)


@pytest.fixture(scope="session")
def square4():
    return geometry.build_geometry("square", 4)


@pytest.fixture(scope="session")
def rotated4_tally(rotated4):
    """Exact failure counts per (weight, class) from decoding all 2^16 errors."""
    return enumeration.exhaustive_weight_tally(rotated4)


def failure_rate_from_tally(tally, n, p):
    """Exact logical failure rate: weighted sum over all failing configs."""
    total = 0.0
    for (w, cls), count in tally.counts.items():
        if cls != (0, 0):
            total += count * p**w * (1.0 - p) ** (n - w)
    return total


@pytest.fixture(scope="session")
def rotated4_exact_rate(rotated4, rotated4_tally):
    def rate(p):
        return failure_rate_from_tally(rotated4_tally, rotated4.n, p)
    return rate


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(20240817)
