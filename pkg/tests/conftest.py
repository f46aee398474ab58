import random

import pytest

from chainflow.generators import mincap_kappa, random_instance
from chainflow.instance import (
    MAX_LENGTH,
    FunctionPlacement,
    Instance,
    NetworkGraph,
    Request,
    RouteConstraint,
)

# instance-set sizes whose product stays at or below 6 chains
SMALL_PLACEMENTS = {
    1: [[1], [2], [3], [4], [5], [6]],
    2: [[1, 2], [2, 1], [2, 2], [2, 3], [3, 2], [1, 6], [6, 1], [1, 3]],
    3: [[1, 2, 3], [2, 1, 2], [1, 1, 3], [2, 2, 1], [1, 3, 2], [1, 1, 1]],
}


def fuzz_instance(seed, max_nodes=30, max_ell=3, max_requests=40, mincap=True):
    """Random graph-mode instance within the desk-scale limits."""
    rng = random.Random(seed)
    ell = rng.randint(1, max_ell)
    n = rng.randint(max(ell, 2), max_nodes)
    lo = mincap_kappa(ell) if mincap else 1
    return random_instance(
        n,
        ell,
        rng.randint(1, min(n, 4)),
        rng.randint(0, max_requests),
        capacity=(lo, lo + rng.randint(0, 2)),
        r=rng.choice([None, rng.randint(ell, 3 * ell + 4)]),
        edge_probability=rng.random() * 0.3,
        seed=seed,
    )


def small_instance(seed, mincap=True):
    """At most 8 requests and at most 6 chains: brute force stays cheap."""
    rng = random.Random(1_000_003 * seed + 17)
    ell = rng.randint(1, 3)
    sizes = rng.choice(SMALL_PLACEMENTS[ell])
    n = rng.randint(max(sizes + [2]), 12)
    k = mincap_kappa(ell) if mincap else 1
    return random_instance(
        n,
        ell,
        sizes,
        rng.randint(1, 8),
        capacity=(k, k + rng.randint(0, 1)),
        r=rng.choice([None, rng.randint(ell, 2 * ell + 3)]),
        edge_probability=rng.random() * 0.4,
        seed=seed,
    )


def path_graph(n, capacity=1):
    return NetworkGraph.from_edges(n, [(i, i + 1) for i in range(n - 1)], capacity)


def graph_instance(graph, functions, requests, r=None):
    constraint = RouteConstraint(MAX_LENGTH, float("inf") if r is None else r)
    reqs = tuple(Request(s, t) for s, t in requests)
    return Instance(graph, reqs, FunctionPlacement(tuple(map(tuple, functions))), constraint)


@pytest.fixture
def path4():
    return path_graph(4, capacity=2)
