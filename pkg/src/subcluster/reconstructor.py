"""Local filter: query access to a reconstructed clusterable graph G'.

Each NewNeighbors(w) answer is consistent with the single graph G'
obtained by overlaying explicit-expander edges at vertices the clustering
oracle reports as outliers: an expander edge (w, u) is present exactly
when w or u is an outlier (or learning failed, in which case the full
hybrid is used).  Both endpoints evaluate the same predicate, so answers
are symmetric and independent of query order.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .expander import expander_neighbors
from .graph_core import Graph
from .oracle import ClusterOracle, OracleParams, OracleState

__all__ = ["ReconstructorState", "build_reconstructor", "new_neighbors", "materialize_gprime"]


@dataclass
class ReconstructorState:
    """Immutable binding of the input graph and the learned oracle."""

    graph: Graph
    oracle: ClusterOracle

    @property
    def failed(self) -> bool:
        return self.oracle.state.failed

    def outlier_count(self) -> int:
        """Number of vertices reported as outliers (queries all of them)."""
        if self.failed:
            return self.graph.n
        return sum(1 for w in range(self.graph.n) if self.oracle.is_outlier(w))


def build_reconstructor(g: Graph, params: OracleParams) -> ReconstructorState:
    return ReconstructorState(graph=g, oracle=ClusterOracle.learn(g, params))


def from_state(g: Graph, state: OracleState) -> ReconstructorState:
    return ReconstructorState(graph=g, oracle=ClusterOracle(g, state))


def new_neighbors(rs: ReconstructorState, w: int) -> np.ndarray:
    """Neighbors of w in the reconstructed graph G' (sorted, deduplicated)."""
    g = rs.graph
    if not 0 <= w < g.n:
        raise IndexError(f"vertex {w} out of range")
    own = g.neighbors(w)
    exp = expander_neighbors(g.n, w)
    if rs.failed or rs.oracle.is_outlier(w):
        added = exp
    else:
        added = [u for u in exp if rs.oracle.is_outlier(u)]
    return np.unique(np.concatenate([own, np.asarray(added, dtype=own.dtype)]))


def materialize_gprime(rs: ReconstructorState) -> Graph:
    """G' in full: asserts answer symmetry, returns a (d+16)-bounded graph."""
    g = rs.graph
    neigh = [new_neighbors(rs, w) for w in range(g.n)]
    edges = []
    for w in range(g.n):
        for u in neigh[w]:
            u = int(u)
            if w < u:
                if not np.any(neigh[u] == w):
                    raise AssertionError(f"asymmetric reconstruction at edge ({w},{u})")
                edges.append((w, u))
    return Graph(g.n, g.d + 16, edges)
