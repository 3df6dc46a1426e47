"""Shared fixtures and small graph builders for the test suite."""

import numpy as np
import pytest

from subcluster.graph_core import Graph


def path_graph(n, d=2):
    return Graph(n, d, [(i, i + 1) for i in range(n - 1)])


def cycle_graph(n, d=2):
    edges = [(i, i + 1) for i in range(n - 1)] + [(0, n - 1)]
    return Graph(n, d, edges)


def complete_graph(n):
    return Graph(n, n - 1, [(i, j) for i in range(n) for j in range(i + 1, n)])


def random_bounded_graph(n, d, seed, target_edges=None):
    """Random simple graph with max degree <= d (greedy edge insertion)."""
    rng = np.random.default_rng(seed)
    if target_edges is None:
        target_edges = (n * d) // 3
    deg = np.zeros(n, dtype=int)
    edges = set()
    attempts = 0
    while len(edges) < target_edges and attempts < 50 * target_edges:
        attempts += 1
        u, v = rng.integers(0, n, size=2)
        if u == v:
            continue
        key = (min(u, v), max(u, v))
        if key in edges or deg[u] >= d or deg[v] >= d:
            continue
        edges.add(key)
        deg[u] += 1
        deg[v] += 1
    return Graph(n, d, sorted(edges))


def random_connected_graph(n, d, seed):
    """Random-tree backbone plus random extra edges, degree-bounded."""
    rng = np.random.default_rng(seed)
    deg = np.zeros(n, dtype=int)
    edges = set()
    order = rng.permutation(n)
    for i in range(1, n):
        u = int(order[i])
        # attach to an earlier vertex with spare degree
        for v in rng.permutation(order[:i]):
            v = int(v)
            if deg[v] < d - 1 and deg[u] < d:
                edges.add((min(u, v), max(u, v)))
                deg[u] += 1
                deg[v] += 1
                break
    extra = n // 2
    for _ in range(10 * extra):
        if extra == 0:
            break
        u, v = rng.integers(0, n, size=2)
        key = (min(u, v), max(u, v))
        if u == v or key in edges or deg[u] >= d or deg[v] >= d:
            continue
        edges.add(key)
        deg[u] += 1
        deg[v] += 1
        extra -= 1
    return Graph(n, d, sorted(edges))


@pytest.fixture(scope="session")
def small_path():
    return path_graph(3)
