"""Planted clusterable instances and adversarial intra-cluster noise.

gen_clusterable builds k near-equal clusters, each an approximately
(d-2)-regular random graph from an erased configuration model (degrees
land in [d-3, d-2]), then sprinkles inter-cluster edges until every
cluster's crossing-edge count reaches its target.  perturb applies one
of four noise modes inside the planted clusters, never touching
inter-cluster edges and always respecting the degree bound.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .graph_core import Graph, as_vertex_set
from .rng import philox

__all__ = [
    "PlantedInstance",
    "gen_clusterable",
    "perturb",
    "store_partition",
    "load_partition",
    "PERTURB_MODES",
]

PERTURB_MODES = ("delete-random", "delete-targeted-cut", "insert-random", "mixed")


@dataclass
class PlantedInstance:
    """A generated graph with its planted partition and noise record."""

    graph: Graph
    parts: list[np.ndarray]
    inter_frac: float
    seed: int
    eps: float = 0.0
    mode: str | None = None
    edits_used: int = 0
    noise_blocks: list[np.ndarray] = field(default_factory=list)

    def __post_init__(self):
        if not self.noise_blocks:
            self.noise_blocks = [np.empty(0, dtype=np.int64) for _ in self.parts]
        covered = np.concatenate(self.parts)
        if np.unique(covered).size != self.graph.n:
            raise ValueError("partition must cover every vertex exactly once")

    @property
    def k(self) -> int:
        return len(self.parts)

    def part_of(self) -> np.ndarray:
        """Vertex -> planted part index."""
        label = np.empty(self.graph.n, dtype=np.int64)
        for i, p in enumerate(self.parts):
            label[p] = i
        return label


def _near_regular_edges(m: int, r: int, rng: np.random.Generator) -> list[tuple[int, int]]:
    """Erased configuration model on m vertices at target degree r, with a
    patch-up pass; final degrees lie in [r-1, r]."""
    if r < 1 or r >= m:
        raise ValueError(f"cannot build {r}-regular-style graph on {m} vertices")
    for _ in range(60):
        stubs = np.repeat(np.arange(m), r)
        rng.shuffle(stubs)
        if stubs.size % 2:
            stubs = stubs[:-1]
        edges: set[tuple[int, int]] = set()
        deg = np.zeros(m, dtype=np.int64)
        for a, b in zip(stubs[0::2].tolist(), stubs[1::2].tolist()):
            if a == b:
                continue
            key = (a, b) if a < b else (b, a)
            if key in edges:
                continue
            edges.add(key)
            deg[a] += 1
            deg[b] += 1
        # patch vertices that fell below r-1 by pairing them up
        for _ in range(4 * m):
            low = np.flatnonzero(deg < r - 1)
            if low.size == 0:
                break
            if low.size == 1:
                partner_pool = np.flatnonzero(deg < r)
                partner_pool = partner_pool[partner_pool != low[0]]
                if partner_pool.size == 0:
                    break
                a, b = int(low[0]), int(rng.choice(partner_pool))
            else:
                a, b = (int(x) for x in rng.choice(low, size=2, replace=False))
            if a == b:
                continue
            key = (a, b) if a < b else (b, a)
            if key in edges:
                continue
            edges.add(key)
            deg[a] += 1
            deg[b] += 1
        if np.all(deg >= r - 1) and np.all(deg <= r):
            return sorted(edges)
    raise RuntimeError(f"configuration model failed to produce degrees in [{r-1},{r}]")


def gen_clusterable(n: int, k: int, d: int, inter_frac: float, seed: int) -> PlantedInstance:
    """Planted instance: k near-equal clusters plus inter-cluster edges.

    Each cluster i receives inter-cluster edges until its crossing count
    reaches ceil(inter_frac * d * |P_i|); the degree bound d holds
    throughout.
    """
    if d < 4:
        raise ValueError("degree bound must be at least 4")
    if k < 1:
        raise ValueError("cluster count must be positive")
    base = n // k
    if base < d:
        raise ValueError(f"clusters of size {base} too small for degree bound {d}")
    if k == 1 and inter_frac > 0:
        raise ValueError("single-cluster instance cannot have inter-cluster edges")
    if inter_frac < 0:
        raise ValueError("inter_frac must be non-negative")

    rng = philox(seed, "gen-clusterable")
    sizes = [base + (1 if i < n % k else 0) for i in range(k)]
    parts = []
    offset = 0
    edges: list[tuple[int, int]] = []
    for size in sizes:
        members = np.arange(offset, offset + size)
        parts.append(members)
        for a, b in _near_regular_edges(size, d - 2, rng):
            edges.append((offset + a, offset + b))
        offset += size

    deg = np.zeros(n, dtype=np.int64)
    for a, b in edges:
        deg[a] += 1
        deg[b] += 1
    edge_set = set(edges)
    label = np.empty(n, dtype=np.int64)
    for i, p in enumerate(parts):
        label[p] = i

    targets = [int(np.ceil(inter_frac * d * len(p))) for p in parts]
    crossing = [0] * k
    guard = 0
    while any(c < t for c, t in zip(crossing, targets)):
        guard += 1
        if guard > 400 * n:
            raise ValueError("inter-cluster edge targets infeasible under degree bound")
        i = min(range(k), key=lambda j: crossing[j] - targets[j])
        cand_u = parts[i][deg[parts[i]] < d]
        if cand_u.size == 0:
            raise ValueError("inter-cluster edge targets infeasible under degree bound")
        u = int(rng.choice(cand_u))
        others = np.flatnonzero((label != i) & (deg < d))
        if others.size == 0:
            raise ValueError("inter-cluster edge targets infeasible under degree bound")
        v = int(rng.choice(others))
        key = (u, v) if u < v else (v, u)
        if key in edge_set:
            continue
        edge_set.add(key)
        deg[u] += 1
        deg[v] += 1
        crossing[i] += 1
        crossing[int(label[v])] += 1

    graph = Graph(n, d, sorted(edge_set))
    return PlantedInstance(graph=graph, parts=parts, inter_frac=inter_frac, seed=seed)


def _intra_edges(inst: PlantedInstance) -> list[tuple[int, int]]:
    label = inst.part_of()
    return [(u, v) for u, v in inst.graph.edges() if label[u] == label[v]]


def perturb(inst: PlantedInstance, eps: float, mode: str, seed: int) -> PlantedInstance:
    """Apply at most floor(eps*d*n) intra-cluster edge edits.

    Inter-cluster edges are never touched and the degree bound is
    preserved.  delete-targeted-cut carves a low-conductance sub-block
    out of one cluster (the adversary the analysis anticipates); the
    block is recorded in noise_blocks.
    """
    if mode not in PERTURB_MODES:
        raise ValueError(f"unknown perturbation mode {mode!r}")
    if eps < 0:
        raise ValueError("eps must be non-negative")
    g = inst.graph
    budget = int(eps * g.d * g.n)
    rng = philox(seed, "perturb", mode)
    edge_set = set(g.edges())
    deg = g.deg.astype(np.int64).copy()
    label = inst.part_of()
    edits = 0
    blocks = [np.empty(0, dtype=np.int64) for _ in inst.parts]

    def delete(u, v):
        nonlocal edits
        edge_set.remove((u, v) if u < v else (v, u))
        deg[u] -= 1
        deg[v] -= 1
        edits += 1

    def insert(u, v):
        nonlocal edits
        edge_set.add((u, v) if u < v else (v, u))
        deg[u] += 1
        deg[v] += 1
        edits += 1

    if budget > 0 and mode == "delete-targeted-cut":
        part_idx = int(np.argmax([len(p) for p in inst.parts]))
        block = _carve_block(inst, part_idx, budget, rng)
        if block is None:
            raise ValueError("perturbation budget too small to isolate a block")
        in_block = np.zeros(g.n, dtype=bool)
        in_block[block] = True
        for u in block:
            for w in g.indices[g.indptr[u] : g.indptr[u + 1]]:
                w = int(w)
                if label[w] == part_idx and not in_block[w]:
                    delete(int(u), w)
        blocks[part_idx] = np.asarray(block, dtype=np.int64)
    elif budget > 0 and mode in ("delete-random", "insert-random", "mixed"):
        n_delete = budget if mode == "delete-random" else 0
        n_insert = budget if mode == "insert-random" else 0
        if mode == "mixed":
            n_delete = budget // 2
            n_insert = budget - n_delete
        intra = _intra_edges(inst)
        if n_delete:
            take = min(n_delete, len(intra))
            for idx in rng.choice(len(intra), size=take, replace=False):
                delete(*intra[int(idx)])
        inserted = 0
        guard = 0
        while inserted < n_insert and guard < 400 * max(n_insert, 1):
            guard += 1
            i = int(rng.integers(len(inst.parts)))
            p = inst.parts[i]
            cand = p[deg[p] < g.d]
            if cand.size < 2:
                continue
            u, v = (int(x) for x in rng.choice(cand, size=2, replace=False))
            key = (u, v) if u < v else (v, u)
            if key in edge_set:
                continue
            insert(u, v)
            inserted += 1
        if mode == "insert-random" and inserted == 0 and n_insert > 0:
            raise ValueError("no intra-cluster insertion possible under degree bound")

    assert edits <= budget
    new_graph = Graph(g.n, g.d, sorted(edge_set))
    return PlantedInstance(
        graph=new_graph,
        parts=[p.copy() for p in inst.parts],
        inter_frac=inst.inter_frac,
        seed=inst.seed,
        eps=eps,
        mode=mode,
        edits_used=edits,
        noise_blocks=blocks,
    )


def _carve_block(inst: PlantedInstance, part_idx: int, budget: int, rng) -> np.ndarray | None:
    """Largest BFS-grown block whose intra-cluster cut fits the budget."""
    g = inst.graph
    part = inst.parts[part_idx]
    label = inst.part_of()
    start = int(rng.choice(part))
    # BFS order within the cluster
    order = []
    seen = {start}
    queue = [start]
    while queue:
        u = queue.pop(0)
        order.append(u)
        for w in g.indices[g.indptr[u] : g.indptr[u + 1]]:
            w = int(w)
            if label[w] == part_idx and w not in seen:
                seen.add(w)
                queue.append(w)
    limit = max(2, len(part) // 3)
    in_block = np.zeros(g.n, dtype=bool)
    best = None
    cut = 0
    for rank, u in enumerate(order[:limit]):
        nbrs = [int(w) for w in g.indices[g.indptr[u] : g.indptr[u + 1]] if label[w] == part_idx]
        inside = sum(1 for w in nbrs if in_block[w])
        cut += len(nbrs) - 2 * inside
        in_block[u] = True
        if rank + 1 >= 2 and cut <= budget:
            best = order[: rank + 1]
    return None if best is None else np.asarray(sorted(best), dtype=np.int64)


# -- partition sidecar files ---------------------------------------------
#
# "PARTITION v1" header, then one line per cluster listing its vertex ids.


def store_partition(parts: list[np.ndarray], path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("PARTITION v1\n")
        for p in parts:
            fh.write(" ".join(str(int(v)) for v in p) + "\n")


def load_partition(path, n: int) -> list[np.ndarray]:
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().strip()
        if header != "PARTITION v1":
            raise ValueError(f"{path}: bad partition header {header!r}")
        parts = []
        for line in fh:
            line = line.strip()
            if not line:
                continue
            parts.append(as_vertex_set([int(x) for x in line.split()], n))
    return parts
