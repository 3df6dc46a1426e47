"""Bounded-degree graph representation with query accounting.

Graphs are undirected, simple, 0-indexed, with an explicit degree bound d
that may exceed the realized maximum degree.  The adjacency structure is
CSR (indptr/indices) with sorted neighbor lists, immutable after
construction.  Every degree/neighbor lookup can be charged to a
QueryCounter so sublinearity audits can meter adjacency-list access.
"""

from __future__ import annotations

import threading
from typing import Iterable, Iterator, Sequence

import numpy as np

__all__ = [
    "Graph",
    "QueryCounter",
    "GraphFormatError",
    "MalformedLineError",
    "SelfLoopError",
    "DuplicateEdgeError",
    "NonCanonicalEdgeError",
    "DegreeBoundError",
    "as_vertex_set",
    "outer_conductance",
    "crossing_edges",
    "load_graph",
    "store_graph",
]


class GraphFormatError(ValueError):
    """Base class for graph validation / file format errors."""


class MalformedLineError(GraphFormatError):
    """A line of the graph file could not be parsed."""


class SelfLoopError(GraphFormatError):
    """An edge joins a vertex to itself."""


class DuplicateEdgeError(GraphFormatError):
    """The same undirected edge appears more than once."""


class NonCanonicalEdgeError(GraphFormatError):
    """An edge line violates the canonical u < v orientation."""


class DegreeBoundError(GraphFormatError):
    """A vertex exceeds the declared degree bound d."""


class QueryCounter:
    """Counts degree/neighbor queries; monotone between resets."""

    def __init__(self) -> None:
        self._count = 0
        self._lock = threading.Lock()

    @property
    def count(self) -> int:
        return self._count

    def add(self, k: int = 1) -> None:
        with self._lock:
            self._count += int(k)

    def reset(self) -> None:
        with self._lock:
            self._count = 0

    def __repr__(self) -> str:
        return f"QueryCounter(count={self._count})"


class Graph:
    """Immutable d-bounded undirected graph with adjacency-list access.

    Parameters
    ----------
    n : int
        Number of vertices (ids are 0..n-1).
    d : int
        Degree bound; must be >= the realized maximum degree.  Walk
        probabilities always use this stored bound, not realized degrees.
    edges : iterable of (u, v)
        Undirected edges, each given once; self-loops and duplicates are
        rejected.
    """

    __slots__ = ("n", "d", "indptr", "indices", "deg", "queries")

    def __init__(self, n: int, d: int, edges: Iterable[tuple[int, int]]):
        if n < 1:
            raise GraphFormatError(f"vertex count must be positive, got {n}")
        if d < 1:
            raise GraphFormatError(f"degree bound must be positive, got {d}")
        adj: list[list[int]] = [[] for _ in range(n)]
        seen: set[tuple[int, int]] = set()
        for u, v in edges:
            u, v = int(u), int(v)
            if not (0 <= u < n and 0 <= v < n):
                raise GraphFormatError(f"edge ({u},{v}) out of range for n={n}")
            if u == v:
                raise SelfLoopError(f"self-loop at vertex {u}")
            key = (u, v) if u < v else (v, u)
            if key in seen:
                raise DuplicateEdgeError(f"duplicate edge {key}")
            seen.add(key)
            adj[u].append(v)
            adj[v].append(u)
        deg = np.array([len(a) for a in adj], dtype=np.int32)
        if deg.size and int(deg.max()) > d:
            v = int(np.argmax(deg))
            raise DegreeBoundError(
                f"vertex {v} has degree {int(deg[v])} > bound d={d}"
            )
        self.n = n
        self.d = d
        self.deg = deg
        self.indptr = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(deg, out=self.indptr[1:])
        self.indices = np.empty(int(self.indptr[-1]), dtype=np.int32)
        for v, a in enumerate(adj):
            a.sort()
            self.indices[self.indptr[v] : self.indptr[v + 1]] = a
        self.queries = QueryCounter()

    # -- adjacency-list oracle ------------------------------------------

    def degree(self, v: int) -> int:
        """Degree query; charges one unit."""
        self._check_vertex(v)
        self.queries.add(1)
        return int(self.deg[v])

    def neighbor(self, v: int, i: int) -> int:
        """i-th neighbor of v (sorted order); charges one unit."""
        self._check_vertex(v)
        if not 0 <= i < self.deg[v]:
            raise IndexError(f"neighbor index {i} out of range for vertex {v}")
        self.queries.add(1)
        return int(self.indices[self.indptr[v] + i])

    def neighbors(self, v: int) -> np.ndarray:
        """All neighbors of v; charges deg(v) units."""
        self._check_vertex(v)
        self.queries.add(int(self.deg[v]))
        return self.indices[self.indptr[v] : self.indptr[v + 1]].copy()

    def _check_vertex(self, v: int) -> None:
        if not 0 <= v < self.n:
            raise IndexError(f"vertex {v} out of range [0, {self.n})")

    # -- structure ------------------------------------------------------

    @property
    def num_edges(self) -> int:
        return int(self.indptr[-1]) // 2

    def edges(self) -> Iterator[tuple[int, int]]:
        """Yield each undirected edge once, as (u, v) with u < v."""
        for u in range(self.n):
            for w in self.indices[self.indptr[u] : self.indptr[u + 1]]:
                if u < w:
                    yield u, int(w)

    def has_edge(self, u: int, v: int) -> bool:
        row = self.indices[self.indptr[u] : self.indptr[u + 1]]
        i = np.searchsorted(row, v)
        return i < row.size and row[i] == v

    def __eq__(self, other) -> bool:
        if not isinstance(other, Graph):
            return NotImplemented
        return (
            self.n == other.n
            and self.d == other.d
            and np.array_equal(self.indptr, other.indptr)
            and np.array_equal(self.indices, other.indices)
        )

    def __hash__(self):
        return hash((self.n, self.d, self.num_edges))

    def __repr__(self) -> str:
        return f"Graph(n={self.n}, d={self.d}, m={self.num_edges})"


def as_vertex_set(s: Sequence[int] | np.ndarray, n: int) -> np.ndarray:
    """Validate and normalize a vertex set: strictly sorted ids < n."""
    arr = np.asarray(s, dtype=np.int64)
    if arr.ndim != 1:
        raise ValueError("vertex set must be one-dimensional")
    if arr.size == 0:
        return arr
    if arr.min() < 0 or arr.max() >= n:
        raise ValueError(f"vertex ids must lie in [0, {n})")
    if not np.all(np.diff(arr) > 0):
        arr = np.unique(arr)
    return arr


def induced_subgraph(g: Graph, s: Sequence[int] | np.ndarray) -> Graph:
    """Subgraph induced on S, vertices relabeled 0..|S|-1, same bound d."""
    sv = as_vertex_set(s, g.n)
    if sv.size == 0:
        raise ValueError("cannot induce on the empty set")
    relabel = -np.ones(g.n, dtype=np.int64)
    relabel[sv] = np.arange(sv.size)
    edges = []
    for new_u, u in enumerate(sv):
        nbrs = g.indices[g.indptr[u] : g.indptr[u + 1]]
        for w in nbrs[nbrs > u]:
            if relabel[w] >= 0:
                edges.append((new_u, int(relabel[w])))
    return Graph(int(sv.size), g.d, edges)


def crossing_edges(g: Graph, s: Sequence[int] | np.ndarray) -> int:
    """Exact |E(S, V\\S)| as an integer."""
    sv = as_vertex_set(s, g.n)
    mask = np.zeros(g.n, dtype=bool)
    mask[sv] = True
    total = 0
    for v in sv:
        nbrs = g.indices[g.indptr[v] : g.indptr[v + 1]]
        total += int(np.count_nonzero(~mask[nbrs]))
    return total


def outer_conductance(g: Graph, s: Sequence[int] | np.ndarray) -> float:
    """Conductance |E(S, V\\S)| / (d |S|); 0 for S = V, errors on empty S."""
    sv = as_vertex_set(s, g.n)
    if sv.size == 0:
        raise ValueError("conductance of the empty set is undefined")
    return crossing_edges(g, sv) / (g.d * sv.size)


# -- file format --------------------------------------------------------
#
# UTF-8 text; first data line "n d"; then one edge per line "u v" with
# u < v, 0-indexed.  Blank lines and lines starting with '#' are ignored.


def load_graph(path) -> Graph:
    """Parse a graph file, validating format and degree bound."""
    header: tuple[int, int] | None = None
    edges: list[tuple[int, int]] = []
    seen: set[tuple[int, int]] = set()
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            if len(parts) != 2:
                raise MalformedLineError(f"{path}:{lineno}: expected two fields, got {line!r}")
            try:
                a, b = int(parts[0]), int(parts[1])
            except ValueError as exc:
                raise MalformedLineError(f"{path}:{lineno}: non-integer field in {line!r}") from exc
            if header is None:
                header = (a, b)
                continue
            n, _ = header
            if a == b:
                raise SelfLoopError(f"{path}:{lineno}: self-loop {a} {b}")
            if a > b:
                raise NonCanonicalEdgeError(f"{path}:{lineno}: edge must satisfy u < v, got {a} {b}")
            if not (0 <= a < n and 0 <= b < n):
                raise MalformedLineError(f"{path}:{lineno}: vertex out of range in {line!r}")
            if (a, b) in seen:
                raise DuplicateEdgeError(f"{path}:{lineno}: duplicate edge {a} {b}")
            seen.add((a, b))
            edges.append((a, b))
    if header is None:
        raise MalformedLineError(f"{path}: missing 'n d' header line")
    return Graph(header[0], header[1], edges)


def store_graph(g: Graph, path) -> None:
    """Write the canonical form: header then sorted 'u v' lines, u < v."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"{g.n} {g.d}\n")
        for u, v in g.edges():
            fh.write(f"{u} {v}\n")
