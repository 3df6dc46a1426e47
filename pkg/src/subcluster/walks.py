"""Lazy random walks on d-regularized bounded-degree graphs.

The walk treats a d-bounded graph as d-regular by virtual self-loops:
from vertex v, each neighbor is reached with probability 1/(2d) and the
walk stays with probability 1 - deg(v)/(2d).  Equivalently the transition
matrix is P = (I + A/d)/2 where A carries d - deg(v) on the diagonal.
Self-loops are never materialized as edges.

Three walk variants are supported:

* plain: exactly t steps;
* uniform averaging: stop after l steps, l uniform in {0..t-1};
* two-phase averaging: l1 + l2 steps, l1, l2 independent uniform in
  {0..t-1}.

Exact mode works on dense probability vectors via repeated sparse
application of P (O(t m) per vector; P^t is never materialized).
Sampled mode runs seeded walks that touch the graph only through
adjacency queries.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from . import _kernels
from .graph_core import Graph
from .rng import derive_key

__all__ = [
    "WalkKind",
    "transition_matrix",
    "lazy_step",
    "exact_p",
    "exact_pbar",
    "exact_qbar",
    "sample_walk",
    "sample_endpoints",
    "check_distribution",
]

_KIND_CODES = {
    "plain": _kernels.KIND_PLAIN,
    "uniform-averaging": _kernels.KIND_UNIFORM,
    "two-phase": _kernels.KIND_TWO_PHASE,
}


@dataclass(frozen=True)
class WalkKind:
    """One of the three walk variants, with its length parameter t."""

    kind: str
    t: int

    def __post_init__(self):
        if self.kind not in _KIND_CODES:
            raise ValueError(f"unknown walk kind {self.kind!r}")
        floor = 0 if self.kind == "plain" else 1
        if self.t < floor:
            raise ValueError(f"t={self.t} too small for {self.kind} walk")

    @classmethod
    def plain(cls, t: int) -> "WalkKind":
        return cls("plain", t)

    @classmethod
    def uniform_averaging(cls, t: int) -> "WalkKind":
        return cls("uniform-averaging", t)

    @classmethod
    def two_phase(cls, t: int) -> "WalkKind":
        return cls("two-phase", t)


def transition_matrix(g: Graph) -> sp.csr_matrix:
    """P = (I + A/d)/2 of the d-regularized graph, as CSR."""
    n, d = g.n, g.d
    off = sp.csr_matrix(
        (np.full(g.indices.size, 1.0 / (2 * d)), g.indices, g.indptr), shape=(n, n)
    )
    stay = sp.diags(1.0 - g.deg / (2.0 * d))
    return (off + stay).tocsr()


def check_distribution(vec: np.ndarray, tol: float = 1e-12) -> np.ndarray:
    """Validate a dense probability vector (non-negative, sums to 1)."""
    vec = np.asarray(vec, dtype=np.float64)
    if vec.ndim != 1:
        raise ValueError("distribution must be a 1-d vector")
    if vec.min() < -tol:
        raise ValueError(f"negative probability mass {vec.min()}")
    if abs(float(vec.sum()) - 1.0) > tol:
        raise ValueError(f"mass {vec.sum()} not normalized")
    return vec


def lazy_step(g: Graph, dist: np.ndarray) -> np.ndarray:
    """One application of P to a distribution (row vector convention)."""
    dist = check_distribution(dist)
    return _apply(g, dist)


def _apply(g: Graph, dist: np.ndarray) -> np.ndarray:
    # dist @ P without building P: P is symmetric, so dist @ P = P @ dist
    d = g.d
    out = dist * (1.0 - g.deg / (2.0 * d))
    np.add.at(out, g.indices, np.repeat(dist, g.deg.astype(np.int64)) / (2.0 * d))
    return out


def _indicator(g: Graph, v: int) -> np.ndarray:
    if not 0 <= v < g.n:
        raise IndexError(f"vertex {v} out of range")
    e = np.zeros(g.n)
    e[v] = 1.0
    return e


def exact_p(g: Graph, v: int, t: int) -> np.ndarray:
    """Distribution of the plain t-step walk from v: 1_v P^t."""
    if t < 0:
        raise ValueError("t must be non-negative")
    P = transition_matrix(g)
    vec = _indicator(g, v)
    for _ in range(t):
        vec = vec @ P
    return vec


def exact_pbar(g: Graph, v: int, t: int) -> np.ndarray:
    """Uniform averaging walk: (1/t) sum of 1_v P^l over l in {0..t-1}."""
    if t < 1:
        raise ValueError("t must be at least 1")
    return _pbar_from(transition_matrix(g), _indicator(g, v), t)


def _pbar_from(P: sp.csr_matrix, vec: np.ndarray, t: int) -> np.ndarray:
    acc = vec.copy()
    cur = vec
    for _ in range(t - 1):
        cur = cur @ P
        acc += cur
    return acc / t


def exact_qbar(g: Graph, v: int, t: int) -> np.ndarray:
    """Two-phase averaging walk: distribution of l1 + l2 steps."""
    if t < 1:
        raise ValueError("t must be at least 1")
    P = transition_matrix(g)
    return _pbar_from(P, _pbar_from(P, _indicator(g, v), t), t)


def sample_walk(g: Graph, v: int, kind: WalkKind, seed: int) -> int:
    """End vertex of one seeded walk; deterministic for a fixed seed.

    Issues at most (walk length) adjacency queries, charged to g.queries.
    """
    return int(sample_endpoints(g, v, kind, seed, 1)[0])


def sample_endpoints(
    g: Graph, v: int, kind: WalkKind, seed: int, count: int, w_start: int = 0
) -> np.ndarray:
    """Endpoints of `count` independent walks (indices w_start..).

    Walk i uses the stream keyed by (seed, "walk", v, index i), so any
    batching yields identical trajectories.
    """
    if not 0 <= v < g.n:
        raise IndexError(f"vertex {v} out of range")
    base = derive_key(seed, "walk", v)
    ends, lens = _kernels.walk_endpoints(
        g.indptr,
        g.indices,
        g.deg,
        2 * g.d,
        v,
        _KIND_CODES[kind.kind],
        kind.t,
        np.uint64(base),
        w_start,
        count,
    )
    g.queries.add(int(lens.sum()))
    return ends
