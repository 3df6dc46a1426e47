"""Exact desk-scale verification oracles.

Everything here is dense, deterministic linear algebra sized for desk
runs: full Laplacian spectra, exact conductances (with brute-force
minimum conductance for tiny sets and Cheeger certificates for large
ones), stochastic complements of lazy-walk chains, exact mixing
profiles of the walk variants, the strong-vertex census, and the
cluster merge procedure that trades inner for outer conductance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .graph_core import Graph, as_vertex_set, crossing_edges, induced_subgraph, outer_conductance

__all__ = [
    "DESK_LIMIT",
    "SpectralReport",
    "ClusterSpectralCheck",
    "ChainClusterQuality",
    "MixingProfile",
    "PartitionReport",
    "regularized_adjacency",
    "laplacian_spectrum",
    "check_cluster_spectral",
    "inner_conductance_exact",
    "cheeger_inner",
    "check_chain_matrix",
    "stochastic_complement",
    "induced_chain_graph",
    "induced_cluster_quality",
    "mixing_profile",
    "strong_census",
    "merge_for_outer",
    "write_mixing_csv",
]

DESK_LIMIT = 4096
_SOLVE_RESIDUAL = 1e-10


def regularized_adjacency(g: Graph) -> np.ndarray:
    """Dense adjacency of the d-regularization: self-loop weight d - deg."""
    A = np.zeros((g.n, g.n))
    for v in range(g.n):
        A[v, g.indices[g.indptr[v] : g.indptr[v + 1]]] = 1.0
    np.fill_diagonal(A, g.d - g.deg)
    return A


@dataclass
class SpectralReport:
    """Eigensystem of the normalized Laplacian L = I - A/d."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray | None  # column i is the i-th eigenvector


def laplacian_spectrum(g: Graph, want_vectors: bool = True) -> SpectralReport:
    """Exact dense eigendecomposition of L; n is capped at desk scale."""
    if g.n > DESK_LIMIT:
        raise ValueError(f"n={g.n} exceeds dense eigensolve limit {DESK_LIMIT}")
    L = np.eye(g.n) - regularized_adjacency(g) / g.d
    if want_vectors:
        vals, vecs = np.linalg.eigh(L)
    else:
        vals, vecs = np.linalg.eigvalsh(L), None
    return SpectralReport(eigenvalues=vals, eigenvectors=vecs)


@dataclass
class ClusterSpectralCheck:
    """Lambda_h <= 2 phi_out and lambda_{h+1} >= phi_in^2 / 2, evaluated
    with measured conductances (phi_in is the Cheeger lower bound, which
    only makes the second inequality harder to violate falsely)."""

    ok: bool
    h: int
    lambda_h: float
    lambda_h1: float
    phi_out: float
    phi_in: float


def check_cluster_spectral(g: Graph, partition: list[np.ndarray], tol: float = 1e-9) -> ClusterSpectralCheck:
    parts = [as_vertex_set(p, g.n) for p in partition]
    h = len(parts)
    if h < 1 or h >= g.n:
        raise ValueError("partition must have between 1 and n-1 parts")
    phi_out = max(outer_conductance(g, p) for p in parts)
    phi_in = min(cheeger_inner(g, p)[0] for p in parts)
    vals = laplacian_spectrum(g, want_vectors=False).eigenvalues
    lam_h, lam_h1 = float(vals[h - 1]), float(vals[h])
    ok = lam_h <= 2 * phi_out + tol and lam_h1 >= phi_in**2 / 2 - tol
    return ClusterSpectralCheck(ok, h, lam_h, lam_h1, phi_out, phi_in)


def cheeger_inner(g: Graph, s: np.ndarray) -> tuple[float, float]:
    """Cheeger bracket [lambda2/2, sqrt(2 lambda2)] for the inner
    conductance of G[S] (d-regularized, same bound d)."""
    sub = induced_subgraph(g, s)
    if sub.n == 1:
        return 1.0, 1.0
    L = np.eye(sub.n) - regularized_adjacency(sub) / sub.d
    lam2 = float(np.linalg.eigvalsh(L)[1])
    lam2 = max(lam2, 0.0)
    return lam2 / 2.0, math.sqrt(2.0 * lam2)


def inner_conductance_exact(g: Graph, s, limit: int = 24) -> float:
    """Exact inner conductance of G[S] by 2^|S| enumeration (|S| <= 24).

    Minimum over non-empty T with |T| <= |S|/2 of
    |E_{G[S]}(T, S-T)| / (d |T|); singleton sets score 1 by convention;
    0 exactly when G[S] is disconnected.
    """
    sv = as_vertex_set(s, g.n)
    k = int(sv.size)
    if k == 0:
        raise ValueError("inner conductance of the empty set is undefined")
    if k == 1:
        return 1.0
    if k > limit:
        raise ValueError(f"|S|={k} exceeds enumeration limit {limit}")
    sub = induced_subgraph(g, sv)
    adj_mask = np.zeros(k, dtype=np.uint32)
    for v in range(k):
        nbrs = sub.indices[sub.indptr[v] : sub.indptr[v + 1]]
        adj_mask[v] = np.bitwise_or.reduce((np.uint32(1) << nbrs.astype(np.uint32)), initial=np.uint32(0))
    best = np.inf
    half = k // 2
    chunk = 1 << 20
    for lo in range(1, 1 << k, chunk):
        masks = np.arange(lo, min(lo + chunk, 1 << k), dtype=np.uint32)
        sizes = np.bitwise_count(masks)
        valid = sizes <= half
        if not valid.any():
            continue
        masks, sizes = masks[valid], sizes[valid]
        cut = np.zeros(masks.size, dtype=np.int64)
        for v in range(k):
            inside = (masks >> np.uint32(v)) & np.uint32(1)
            cut += inside * np.bitwise_count(adj_mask[v] & ~masks)
        vals = cut / (sub.d * sizes.astype(np.float64))
        best = min(best, float(vals.min()))
        if best == 0.0:
            break
    return best


# -- Markov chains and stochastic complements ------------------------------


def check_chain_matrix(P: np.ndarray, tol: float = 1e-12) -> np.ndarray:
    P = np.asarray(P, dtype=np.float64)
    if P.ndim != 2 or P.shape[0] != P.shape[1]:
        raise ValueError("chain matrix must be square")
    if P.min() < -tol:
        raise ValueError(f"negative transition probability {P.min()}")
    rows = P.sum(axis=1)
    if np.abs(rows - 1.0).max() > tol:
        raise ValueError("rows must sum to 1")
    return P


def stochastic_complement(P: np.ndarray, dset) -> np.ndarray:
    """P' = P_D + P_1 (I - P_B)^{-1} P_2 over the states in dset."""
    P = check_chain_matrix(P)
    n = P.shape[0]
    d_ix = as_vertex_set(dset, n)
    if d_ix.size == 0:
        raise ValueError("state subset must be non-empty")
    b_ix = np.setdiff1d(np.arange(n), d_ix)
    if b_ix.size == 0:
        return P.copy()
    PD = P[np.ix_(d_ix, d_ix)]
    P1 = P[np.ix_(d_ix, b_ix)]
    P2 = P[np.ix_(b_ix, d_ix)]
    PB = P[np.ix_(b_ix, b_ix)]
    M = np.eye(b_ix.size) - PB
    try:
        X = np.linalg.solve(M, P2)
    except np.linalg.LinAlgError as exc:
        raise np.linalg.LinAlgError("I - P_B is singular (chain never leaves B)") from exc
    resid = np.abs(M @ X - P2).max()
    if resid > _SOLVE_RESIDUAL:
        raise np.linalg.LinAlgError(f"complement solve residual {resid:.2e} too large")
    return PD + P1 @ X


def induced_chain_graph(g: Graph, dset) -> np.ndarray:
    """Weighted adjacency A_D + A_1 (dI - A_B)^{-1} A_2 of the chain
    induced on dset by short-circuiting excursions through the rest.

    With A the d-regularized adjacency (self-loop weight d - deg), the
    lazy walk's B-block is P_B = (I + A_B/d)/2, so inverting I - P_B
    yields the dI - A_B middle factor; the resulting weighted graph has
    weighted degree exactly d on every state, making the complemented
    walk (I + W/d)/2 doubly stochastic.
    """
    A = regularized_adjacency(g)
    d_ix = as_vertex_set(dset, g.n)
    b_ix = np.setdiff1d(np.arange(g.n), d_ix)
    AD = A[np.ix_(d_ix, d_ix)]
    if b_ix.size == 0:
        return AD
    # B components with no edge to D never occur on a D-to-D excursion;
    # dropping them keeps the dI - A_B block nonsingular
    b_ix = _reachable_from(g, d_ix, b_ix)
    if b_ix.size == 0:
        return AD
    A1 = A[np.ix_(d_ix, b_ix)]
    A2 = A[np.ix_(b_ix, d_ix)]
    AB = A[np.ix_(b_ix, b_ix)]
    M = g.d * np.eye(b_ix.size) - AB
    X = np.linalg.solve(M, A2)
    resid = np.abs(M @ X - A2).max()
    if resid > _SOLVE_RESIDUAL:
        raise np.linalg.LinAlgError(f"induced-chain solve residual {resid:.2e} too large")
    return AD + A1 @ X


def _reachable_from(g: Graph, d_ix: np.ndarray, b_ix: np.ndarray) -> np.ndarray:
    in_b = np.zeros(g.n, dtype=bool)
    in_b[b_ix] = True
    frontier = list(d_ix)
    seen = np.zeros(g.n, dtype=bool)
    reach = np.zeros(g.n, dtype=bool)
    while frontier:
        u = frontier.pop()
        for w in g.indices[g.indptr[u] : g.indptr[u + 1]]:
            w = int(w)
            if in_b[w] and not seen[w]:
                seen[w] = True
                reach[w] = True
                frontier.append(w)
    return np.flatnonzero(reach)


@dataclass
class ChainClusterQuality:
    """Conductance evidence for one surviving cluster inside the induced
    chain's weighted graph."""

    members: np.ndarray
    outer_in_chain: float
    outer_bound: float  # 3 * phi_G(C_i)
    inner_monotone: bool  # off-diagonal weights within D only grew
    inner_cheeger_lower: float


def induced_cluster_quality(g: Graph, parts_db: list[tuple[np.ndarray, np.ndarray]]):
    """Per-cluster quality in the induced chain graph.

    parts_db lists (D_i, B_i) per cluster; only clusters with
    |D_i| >= 2 |B_i| enter the chain's state set D, everything else is
    short-circuited.  Returns (list of ChainClusterQuality, W, d_index).
    """
    keep = [(as_vertex_set(D, g.n), as_vertex_set(B, g.n)) for D, B in parts_db]
    survivors = [(D, B) for D, B in keep if D.size >= 2 * B.size]
    if not survivors:
        raise ValueError("no cluster satisfies |D_i| >= 2 |B_i|")
    d_ix = np.sort(np.concatenate([D for D, _ in survivors]))
    W = induced_chain_graph(g, d_ix)
    pos = {int(v): i for i, v in enumerate(d_ix)}
    A = regularized_adjacency(g)
    AD = A[np.ix_(d_ix, d_ix)]
    off = ~np.eye(d_ix.size, dtype=bool)
    monotone_all = bool(np.all(W[off] >= AD[off] - 1e-12))
    out = []
    for (D, B), (C_full) in zip(survivors, [np.sort(np.concatenate([D, B])) for D, B in survivors]):
        rows = np.array([pos[int(v)] for v in D])
        mask = np.zeros(d_ix.size, dtype=bool)
        mask[rows] = True
        cross = float(W[np.ix_(rows, np.flatnonzero(~mask))].sum())
        outer_chain = cross / (g.d * D.size)
        phi_c = outer_conductance(g, C_full)
        sub = W[np.ix_(rows, rows)]
        lam2 = _weighted_lambda2(sub, g.d)
        out.append(
            ChainClusterQuality(
                members=D,
                outer_in_chain=outer_chain,
                outer_bound=3.0 * phi_c,
                inner_monotone=monotone_all,
                inner_cheeger_lower=lam2 / 2.0,
            )
        )
    return out, W, d_ix


def _weighted_lambda2(W: np.ndarray, d: int) -> float:
    """lambda2 of I - W'/d where W' re-regularizes rows to weight d."""
    m = W.shape[0]
    if m == 1:
        return 2.0  # singleton: inner conductance 1 by convention
    Wp = W.copy()
    rows = Wp.sum(axis=1)
    np.fill_diagonal(Wp, Wp.diagonal() + np.maximum(d - rows, 0.0))
    L = np.eye(m) - Wp / d
    return float(max(np.linalg.eigvalsh(L)[1], 0.0))


# -- mixing ----------------------------------------------------------------


def _walk_rows(g: Graph, t: int, kernel: str) -> np.ndarray:
    """Rows of P^t (kernel 'p') or of the t-step averaging operator
    (kernel 'pbar'), via the exact eigendecomposition of the symmetric P."""
    P = (np.eye(g.n) + regularized_adjacency(g) / g.d) / 2.0
    w, U = np.linalg.eigh(P)
    w = np.clip(w, 0.0, 1.0)
    if kernel == "p":
        f = w**t
    elif kernel == "pbar":
        f = np.empty_like(w)
        near_one = np.isclose(w, 1.0, atol=1e-14)
        f[near_one] = 1.0
        ws = w[~near_one]
        f[~near_one] = (1.0 - ws**t) / (t * (1.0 - ws))
    else:
        raise ValueError(f"unknown kernel {kernel!r}; use 'p' or 'pbar'")
    return (U * f) @ U.T


@dataclass
class MixingProfile:
    """Per-vertex total variation distance to the uniform distribution on
    the vertex's own part."""

    labels: np.ndarray
    tv: np.ndarray
    t: int
    kernel: str

    def part_fraction_below(self, part_index: int, threshold: float) -> float:
        sel = self.labels == part_index
        return float((self.tv[sel] <= threshold).mean())


def mixing_profile(g: Graph, partition: list[np.ndarray], t: int, kernel: str = "pbar") -> MixingProfile:
    parts = [as_vertex_set(p, g.n) for p in partition]
    labels = -np.ones(g.n, dtype=np.int64)
    for i, p in enumerate(parts):
        labels[p] = i
    if (labels < 0).any():
        raise ValueError("partition must cover every vertex")
    rows = _walk_rows(g, t, kernel)
    tv = np.empty(g.n)
    for i, p in enumerate(parts):
        uni = np.zeros(g.n)
        uni[p] = 1.0 / p.size
        tv[p] = 0.5 * np.abs(rows[p] - uni).sum(axis=1)
    return MixingProfile(labels=labels, tv=tv, t=t, kernel=kernel)


def strong_census(g: Graph, c, t: int, kappa: float) -> float:
    """Fraction of v in C with TV(pbar_v^t, U_C) <= kappa (exact)."""
    cv = as_vertex_set(c, g.n)
    if cv.size == 0:
        raise ValueError("census set must be non-empty")
    rows = _walk_rows(g, t, "pbar")
    uni = np.zeros(g.n)
    uni[cv] = 1.0 / cv.size
    tv = 0.5 * np.abs(rows[cv] - uni).sum(axis=1)
    return float((tv <= kappa).mean())


def write_mixing_csv(path, profile: MixingProfile) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("vertex,cluster,tv_distance\n")
        for v in range(profile.labels.size):
            fh.write(f"{v},{int(profile.labels[v])},{profile.tv[v]:.17g}\n")


# -- cluster merging (outer-conductance repair) -----------------------------


@dataclass
class PartitionReport:
    """A partition with measured conductances and merge provenance."""

    parts: list[np.ndarray]
    outer: list[float]
    inner: list[tuple[float, str]]  # (value, method tag)
    merges: int = 0
    mixing: MixingProfile | None = None

    def summary(self) -> str:
        lines = [f"parts {len(self.parts)} merges {self.merges}"]
        for i, p in enumerate(self.parts):
            val, method = self.inner[i]
            lines.append(
                f"part {i}: size {p.size} outer {self.outer[i]:.6g} "
                f"inner {val:.6g} ({method})"
            )
        return "\n".join(lines)


def _measure_partition(g: Graph, parts: list[np.ndarray], merges: int) -> PartitionReport:
    outer = [outer_conductance(g, p) for p in parts]
    inner = []
    for p in parts:
        if p.size <= 24:
            inner.append((inner_conductance_exact(g, p), "exact"))
        else:
            inner.append((cheeger_inner(g, p)[0], "cheeger"))
    return PartitionReport(parts=parts, outer=outer, inner=inner, merges=merges)


def merge_for_outer(gprime: Graph, partition: list[np.ndarray], nu: float) -> PartitionReport:
    """Repeatedly merge C_i into C_j while |C_i| <= |C_j| and
    |E'(C_i, C_j)| >= nu * d * |C_i|; the loop strictly shrinks the part
    count so it terminates, and afterwards every part has outer
    conductance at most min(k*nu, 1)."""
    if not 0.0 <= nu <= 1.0:
        raise ValueError("nu must lie in [0, 1]")
    parts = [as_vertex_set(p, gprime.n) for p in partition]
    merges = 0
    while True:
        label = -np.ones(gprime.n, dtype=np.int64)
        for i, p in enumerate(parts):
            label[p] = i
        h = len(parts)
        cross = np.zeros((h, h), dtype=np.int64)
        for u, v in gprime.edges():
            a, b = int(label[u]), int(label[v])
            if a != b:
                cross[a, b] += 1
                cross[b, a] += 1
        candidates = []
        for i in range(h):
            for j in range(h):
                if i == j or parts[i].size > parts[j].size:
                    continue
                if cross[i, j] >= nu * gprime.d * parts[i].size:
                    candidates.append((parts[i].size, i, j))
        if not candidates:
            return _measure_partition(gprime, parts, merges)
        _, i, j = min(candidates)
        merged = np.sort(np.concatenate([parts[i], parts[j]]))
        parts = [p for k, p in enumerate(parts) if k not in (i, j)] + [merged]
        merges += 1
