import numpy as np
import pytest

from catlinks.graph import CategoryAssignment, DocumentGraph


def random_graph(rng, n, m, self_loops=False):
    s = rng.integers(0, n, size=m)
    t = rng.integers(0, n, size=m)
    if not self_loops:
        keep = s != t
        s, t = s[keep], t[keep]
    return DocumentGraph.from_arcs(s, t, n)


def random_cats(rng, n, C, max_per_node=4, allow_empty=True):
    lo = 0 if allow_empty else 1
    sets = []
    for _ in range(n):
        k = int(rng.integers(lo, max_per_node + 1))
        sets.append(rng.choice(C, size=min(k, C), replace=False).tolist())
    return CategoryAssignment.from_sets(sets, C)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
