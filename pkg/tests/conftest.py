import numpy as np
import pytest

from streamcover.oracle import CoverInstance
from streamcover.utilities import Graph


def random_cover_instance(rng: np.random.Generator, max_n: int = 20, max_m: int = 22) -> CoverInstance:
    n = int(rng.integers(4, max_n + 1))
    m = int(rng.integers(3, max_m + 1))
    sets = []
    for _ in range(m):
        size = int(rng.integers(1, max(2, n // 2) + 1))
        sets.append(sorted(set(rng.integers(0, n, size).tolist())))
    return CoverInstance(n, sets)


def random_graph(rng: np.random.Generator, n: int, p: float) -> Graph:
    edges = [(u, v) for u in range(n) for v in range(u + 1, n) if rng.random() < p]
    return Graph.from_edges(edges, n)


def union_size(sets, ids) -> int:
    out = set()
    for i in ids:
        out |= set(sets[i])
    return len(out)


def reference_sieve(sets, Q, memory, alpha=2.0):
    """Threshold sieve over explicit sets using plain Python set arithmetic."""
    import math

    caps = []
    while sum(caps) + math.ceil(alpha ** len(caps) - 1e-12) <= memory:
        caps.append(math.ceil(alpha ** len(caps) - 1e-12))
    levels = [[] for _ in caps]
    for e in range(len(sets)):
        for j, members in enumerate(levels):
            if len(members) >= caps[j]:
                continue
            gain = union_size(sets, members + [e]) - union_size(sets, members)
            if gain >= Q / alpha ** j:
                members.append(e)
    return levels


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
