"""Explicit bounded-degree expander on [n] with local neighbor queries.

Margulis-Gabber-Galil style: vertices are points of Z_m x Z_m with
m = ceil(sqrt(n)), connected by four affine shear maps and their
inverses (degree <= 8, below the cap of 16).  Vertex indices >= n
(padding) are never emitted: a neighbor that lands in the padding is
rerouted by repeatedly applying the same map until the image drops
below n.  Both endpoints of a rerouted edge discover each other via a
map/inverse-map pair at the same orbit distance, so the graph stays
symmetric.  Each query touches O(polylog n) state; nothing global is
precomputed.

No expansion constant is hardcoded: downstream claims rely on the
measured spectral gap certificate from expander_gap.
"""

from __future__ import annotations

import math

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg

from .graph_core import Graph

__all__ = ["DEGREE_CAP", "expander_neighbors", "expander_gap", "materialize_expander"]

DEGREE_CAP = 16
_GAP_DESK_LIMIT = 20_000


def _maps(m: int):
    return (
        lambda x, y: ((x + 2 * y) % m, y),
        lambda x, y: ((x - 2 * y) % m, y),
        lambda x, y: ((x + 2 * y + 1) % m, y),
        lambda x, y: ((x - 2 * y - 1) % m, y),
        lambda x, y: (x, (y + 2 * x) % m),
        lambda x, y: (x, (y - 2 * x) % m),
        lambda x, y: (x, (y + 2 * x + 1) % m),
        lambda x, y: (x, (y - 2 * x - 1) % m),
    )


def expander_neighbors(n: int, v: int) -> list[int]:
    """Neighbors of v in the explicit expander; sorted, <= 16 of them."""
    if not 0 <= v < n:
        raise IndexError(f"vertex {v} out of range [0, {n})")
    m = math.isqrt(n - 1) + 1 if n > 1 else 1
    cap = (m.bit_length() * 2 + 6) ** 2  # polylog reroute budget
    x0, y0 = v % m, v // m
    out = set()
    for f in _maps(m):
        x, y = f(x0, y0)
        hops = 1
        while y * m + x >= n and hops <= cap:
            x, y = f(x, y)
            hops += 1
        w = y * m + x
        if w < n and w != v:
            out.add(w)
    assert len(out) <= DEGREE_CAP
    return sorted(out)


def materialize_expander(n: int) -> Graph:
    """The full expander as a Graph (degree bound 16); desk-scale only."""
    edges = []
    for v in range(n):
        for w in expander_neighbors(n, v):
            if v < w:
                edges.append((v, w))
    return Graph(n, DEGREE_CAP, edges)


def expander_gap(n: int) -> float:
    """Second-smallest eigenvalue of the normalized Laplacian I - A/16
    of the 16-regularized expander: the Cheeger certificate lambda2/2
    lower-bounds its conductance."""
    if n > _GAP_DESK_LIMIT:
        raise ValueError(f"n={n} exceeds the desk-scale eigensolve limit {_GAP_DESK_LIMIT}")
    g = materialize_expander(n)
    return regularized_lambda2(g)


def regularized_lambda2(g: Graph) -> float:
    """lambda_2 of I - A/d with self-loop regularization to degree d."""
    n, d = g.n, g.d
    if n == 1:
        return 0.0
    A = sp.csr_matrix(
        (np.ones(g.indices.size), g.indices, g.indptr), shape=(n, n)
    ) + sp.diags((g.d - g.deg).astype(float))
    L = sp.eye(n) - A / d
    if n <= 600:
        return float(np.linalg.eigvalsh(L.toarray())[1])
    vals = scipy.sparse.linalg.eigsh(
        L.tocsc(), k=2, sigma=-0.05, which="LM", return_eigenvectors=False
    )
    return float(np.sort(vals)[1])
