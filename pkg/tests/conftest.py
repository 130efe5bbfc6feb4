import numpy as np
import pytest

from heapgrowth.rng import RngStream


@pytest.fixture
def rng():
    return RngStream(12345, 0)


def brute_replay(n, events, periodic=False):
    """Plain-Python hard-rule oracle, independent of the package code."""
    h = [0] * n
    for c in events:
        i = c - 1
        if periodic:
            nb = {(i - 1) % n, i, (i + 1) % n}
        else:
            nb = {j for j in (i - 1, i, i + 1) if 0 <= j < n}
        h[i] = max(h[j] for j in nb) + 1
    return h


def random_events(gen: np.random.Generator, n: int, t: int) -> list[int]:
    return (gen.integers(0, n, t) + 1).tolist()
