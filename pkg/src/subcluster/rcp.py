"""Reduced collision probability: sublinear estimator and exact oracle.

For a vertex v, walk length t and cutoff theta, the light set is
S_v^theta = {w : pbar_v^t(w) <= (1-theta)/sqrt(n)} and the theta-reduced
collision probability of u, v is

    rcp_theta(u, v) = sum over w in S_u^theta & S_v^theta of
                      pbar_u^t(w) * pbar_v^t(w).

The sampled estimator repeats this trial a configured number of times:
build empirical light sets F_u, F_v from seeded uniform averaging walks,
collect x walks from each endpoint that land in its light set (failing
the trial if more than 20x attempts are needed on either side), count
pairwise endpoint collisions A between the two walk sets, and report
A/x^2.  The final answer is the lower median over successful trials, or
an abort when a majority of trials fail.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from . import _kernels
from .graph_core import Graph
from .rng import derive_key
from .walks import exact_pbar

__all__ = ["RcpParams", "RcpOutcome", "CollisionEngine", "find_set", "estimate_rcp", "exact_rcp"]


@dataclass(frozen=True)
class RcpParams:
    """Knobs of the sampled rcp estimator.

    trials/x default to the size-derived rules ceil(c_big * ln n) and
    ceil(sqrt(n)/delta^2); x is capped at x_cap to keep desk runs
    feasible.
    """

    theta: float
    delta: float
    t: int
    c_big: float = 4.0
    trials: int | None = None
    x: int | None = None
    x_cap: int = 10**6

    def __post_init__(self):
        if not 0.0 <= self.theta < 0.5:
            raise ValueError(f"theta must lie in [0, 1/2), got {self.theta}")
        if not 0.0 < self.delta < 1.0:
            raise ValueError(f"delta must lie in (0, 1), got {self.delta}")
        if self.t < 1:
            raise ValueError("walk length t must be at least 1")
        if self.c_big < 1:
            raise ValueError("repetition constant must be at least 1")
        if self.trials is not None and self.trials < 1:
            raise ValueError("trial count must be positive")
        if self.x is not None and self.x < 1:
            raise ValueError("walk budget x must be positive")

    def resolve_x(self, n: int) -> int:
        if self.x is not None:
            return min(self.x, self.x_cap)
        return min(math.ceil(math.sqrt(n) / self.delta**2), self.x_cap)

    def n_trials(self, n: int) -> int:
        if self.trials is not None:
            return self.trials
        return math.ceil(self.c_big * math.log(n))

    def findset_walks(self, n: int) -> int:
        return math.ceil(self.c_big * math.sqrt(n) * math.log(n))

    def findset_threshold(self, n: int) -> float:
        return self.c_big * (1.0 - self.theta / 2.0) * math.log(n)


@dataclass(frozen=True)
class RcpOutcome:
    """Either a collision-probability estimate or an abort."""

    value: float | None

    def __post_init__(self):
        if self.value is not None:
            if not math.isfinite(self.value) or not 0.0 <= self.value <= 1.0:
                raise ValueError(f"estimate out of range: {self.value}")

    @classmethod
    def estimate(cls, value: float) -> "RcpOutcome":
        return cls(float(value))

    @classmethod
    def abort(cls) -> "RcpOutcome":
        return cls(None)

    @property
    def aborted(self) -> bool:
        return self.value is None


@dataclass
class TrialStats:
    """Walk statistics of one (vertex, trial): selection failed, or the
    endpoint counts of the x walks that landed in the light set."""

    fail: bool
    counts: np.ndarray | None  # int32 histogram over the n vertices


class CollisionEngine:
    """Seeded walk-statistics engine shared by the estimator and oracle.

    Per-(purpose, vertex, trial) statistics are pure functions of the
    master seed, so they can be cached and shared across pair estimates:
    the Appendix-style procedure for a pair simply combines the two
    endpoint statistics.
    """

    def __init__(self, g: Graph, params: RcpParams, master_seed: int):
        self.g = g
        self.params = params
        self.master_seed = int(master_seed)
        self.x = params.resolve_x(g.n)
        self.trials = params.n_trials(g.n)
        self._cache: dict[tuple[str, int, int], TrialStats] = {}

    # -- raw walk batches -------------------------------------------------

    def _endpoints(self, vertex: int, key: int, w_start: int, count: int):
        g = self.g
        return _kernels.walk_endpoints(
            g.indptr,
            g.indices,
            g.deg,
            2 * g.d,
            vertex,
            _kernels.KIND_UNIFORM,
            self.params.t,
            np.uint64(key),
            w_start,
            count,
        )

    def find_light_set(self, vertex: int, key: int) -> np.ndarray:
        """Empirical light set: vertices hit at most the threshold count
        by c_big*sqrt(n)*ln(n) uniform averaging walks (never-hit vertices
        included)."""
        g = self.g
        walks = self.params.findset_walks(g.n)
        ends, lens = self._endpoints(vertex, key, 0, walks)
        g.queries.add(int(lens.sum(dtype=np.int64)))
        hits = np.bincount(ends, minlength=g.n)
        return hits <= self.params.findset_threshold(g.n)

    def _collect(self, vertex: int, key: int, light: np.ndarray) -> TrialStats:
        """First x walks (in walk-index order) that end in the light set;
        fails when 20x attempts do not yield x such walks."""
        g = self.g
        x = self.x
        budget = 20 * x
        counts = np.zeros(g.n, dtype=np.int32)
        hits = 0
        attempts = 0
        chunk = x + x // 8 + 32
        while attempts < budget:
            m = min(chunk, budget - attempts)
            ends, lens = self._endpoints(vertex, key, attempts, m)
            good = np.flatnonzero(light[ends])
            need = x - hits
            if good.size >= need:
                # x-th hit reached inside this chunk; charge only the
                # walks actually performed up to and including it
                stop = int(good[need - 1])
                g.queries.add(int(lens[: stop + 1].sum(dtype=np.int64)))
                sel = ends[good[:need]]
                counts += np.bincount(sel, minlength=g.n).astype(np.int32)
                return TrialStats(fail=False, counts=counts)
            g.queries.add(int(lens.sum(dtype=np.int64)))
            sel = ends[good]
            counts += np.bincount(sel, minlength=g.n).astype(np.int32)
            hits += good.size
            attempts += m
            chunk *= 2
        return TrialStats(fail=True, counts=None)

    # -- per-(purpose, vertex, trial) statistics --------------------------

    def trial_stats(self, purpose: str, vertex: int, trial: int) -> TrialStats:
        cache_key = (purpose, vertex, trial)
        stats = self._cache.get(cache_key)
        if stats is None:
            kf = derive_key(self.master_seed, purpose, "findset", vertex, trial)
            kc = derive_key(self.master_seed, purpose, "collect", vertex, trial)
            light = self.find_light_set(vertex, kf)
            stats = self._collect(vertex, kc, light)
            self._cache[cache_key] = stats
        return stats

    def drop(self, purpose: str, vertex: int) -> None:
        """Evict cached statistics (they regenerate deterministically)."""
        for r in range(self.trials):
            self._cache.pop((purpose, vertex, r), None)

    def estimate_pair(self, purpose_u: str, u: int, purpose_v: str, v: int) -> RcpOutcome:
        """Median-of-trials pairwise collision estimate for (u, v)."""
        values = []
        for r in range(self.trials):
            su = self.trial_stats(purpose_u, u, r)
            sv = self.trial_stats(purpose_v, v, r)
            if su.fail or sv.fail:
                continue
            a = int(np.dot(su.counts.astype(np.int64), sv.counts.astype(np.int64)))
            values.append(a / (self.x * self.x))
        if 2 * len(values) > self.trials:
            values.sort()
            return RcpOutcome.estimate(values[(len(values) - 1) // 2])
        return RcpOutcome.abort()


def find_set(g: Graph, u: int, theta: float, t: int, seed: int, c_big: float = 4.0) -> np.ndarray:
    """Empirical light set F_u as a sorted vertex array."""
    if not 0 <= u < g.n:
        raise IndexError(f"vertex {u} out of range")
    params = RcpParams(theta=theta, delta=0.5, t=t, c_big=c_big)
    engine = CollisionEngine(g, params, seed)
    key = derive_key(seed, "findset-op", "findset", u, 0)
    return np.flatnonzero(engine.find_light_set(u, key)).astype(np.int64)


def estimate_rcp(g: Graph, u: int, v: int, params: RcpParams, seed: int) -> RcpOutcome:
    """Sampled rcp estimate for the pair (u, v); Abort is a value.

    The two endpoints use disjoint stream roles, so u == v still draws
    two independent walk collections.
    """
    for w in (u, v):
        if not 0 <= w < g.n:
            raise IndexError(f"vertex {w} out of range")
    engine = CollisionEngine(g, params, seed)
    return engine.estimate_pair("rcp-a", u, "rcp-b", v)


def exact_rcp(g: Graph, u: int, v: int, theta: float, t: int) -> float:
    """Exact rcp via exact averaging-walk vectors and exact light sets."""
    if not 0.0 <= theta <= 1.0:
        raise ValueError("theta must lie in [0, 1]")
    pu = exact_pbar(g, u, t)
    pv = pu if v == u else exact_pbar(g, v, t)
    cut = (1.0 - theta) / math.sqrt(g.n)
    mask = (pu <= cut) & (pv <= cut)
    return float(np.dot(pu[mask], pv[mask]))
