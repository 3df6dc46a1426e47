"""Robust clustering oracle: learning phase and query answering.

Learning samples a vertex set S, estimates pairwise reduced collision
probabilities to build a weighted similarity graph H on S, then mines H
for cores: large maximal cliques whose edge weights clear a level on the
tau ladder (tau_j = tau_0 (1+kappa/3)^j, levels j = 0..J with tau_j <= 1).
A core found at level j must have every clique weight >= (1-kappa)/(tau_j n)
and at least (1-kappa) tau_j |S| members.

Query answering re-estimates collisions between the query vertex and the
sample; a vertex belongs to cluster i when core i is the unique core
whose members all clear that core's weight threshold, and is an outlier
otherwise.  All randomness is derived from the master seed per
(purpose, vertex, trial), so answers are pure functions of the query
vertex, independent of query order, and reproducible from a serialized
state in a fresh process.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .graph_core import Graph, as_vertex_set
from .rcp import CollisionEngine, RcpParams
from .rng import philox

__all__ = [
    "OracleParams",
    "SimilarityGraph",
    "Core",
    "OracleState",
    "ClusterOracle",
    "learn_core",
    "find_core",
    "check_core",
    "is_outlier",
    "which_cluster",
    "same_cluster",
]

STATE_HEADER = "SUBCLUSTER-ORACLE v1"


@dataclass(frozen=True)
class OracleParams:
    """Resolved learning/query parameters for one graph size.

    Use the practical() or paper() factories; all size-derived rules are
    frozen at construction so a serialized state replays identically.
    "log" in every rule is the natural logarithm.
    """

    n: int
    k: int
    phi: float
    eps: float
    kappa: float
    theta0: float
    delta0: float
    t: int
    s_size: int
    c_sample: float
    tau0: float
    tau_growth: float
    trials: int
    c_big: float
    x_cap: int
    eps_gate: float
    profile: str
    master_seed: int

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("k must be at least 1")
        if not 0.0 < self.phi < 1.0:
            raise ValueError("phi must lie in (0, 1)")
        if self.eps < 0:
            raise ValueError("eps must be non-negative")
        if not 0.0 < self.kappa < 1.0:
            raise ValueError("kappa must lie in (0, 1)")
        if self.t < 1 or self.s_size < 1 or self.trials < 1:
            raise ValueError("t, s_size and trials must be positive")
        if self.tau_growth <= 1.0:
            raise ValueError("tau ladder growth must exceed 1")
        if self.tau0 <= 0:
            raise ValueError("tau0 must be positive")

    @classmethod
    def practical(
        cls,
        n: int,
        k: int,
        phi: float,
        eps: float,
        master_seed: int,
        *,
        beta: float = 20.0,
        kappa: float = 0.2,
        theta0: float = 0.1,
        delta0: float = 0.1,
        c_sample: float = 0.5,
        c_big: float = 4.0,
        trials: int = 7,
        min_core: int = 5,
        x_cap: int = 10**6,
    ) -> "OracleParams":
        """Desk-scale profile: every structural relation of the paper
        profile (tau ladder, thresholds, sample rule) with constants that
        let desk runs terminate."""
        t = math.ceil(beta * math.log(n) / phi**2)
        s_size = cls._sample_size(n, k, phi, eps, c_sample)
        s_size = max(40, min(400, n, s_size))
        tau0_paper = 3.0 * math.sqrt(6.0 * max(eps, phi / n) / phi)
        tau_floor = min_core / ((1.0 - kappa) * s_size)
        tau0 = max(tau0_paper, tau_floor) if tau0_paper <= 1.0 else tau_floor
        return cls(
            n=n, k=k, phi=phi, eps=eps, kappa=kappa, theta0=theta0, delta0=delta0,
            t=t, s_size=s_size, c_sample=c_sample, tau0=tau0,
            tau_growth=1.0 + kappa / 3.0, trials=trials, c_big=c_big, x_cap=x_cap,
            eps_gate=phi / 6.0, profile="practical", master_seed=int(master_seed),
        )

    @classmethod
    def paper(
        cls,
        n: int,
        k: int,
        phi: float,
        eps: float,
        master_seed: int,
        *,
        theta0: float = 1e-5,
        delta0: float = 1e-5,
        c_sample: float = 4.0,
        c_big: float = 4.0,
        x_cap: int = 10**18,
    ) -> "OracleParams":
        """Literal constants: kappa = 100 delta0^2, t = 960 log n/(kappa phi^2),
        trials = ceil(c_big log n), gate eps > phi kappa^2 / 100.  Feasible
        only for parameter-validation runs, not desk-scale learning."""
        kappa = 100.0 * delta0**2
        t = math.ceil(960.0 * math.log(n) / (kappa * phi**2))
        s_size = min(cls._sample_size(n, k, phi, eps, c_sample), n)
        tau0 = 3.0 * math.sqrt(6.0 * max(eps, phi / n) / phi)
        return cls(
            n=n, k=k, phi=phi, eps=eps, kappa=kappa, theta0=theta0, delta0=delta0,
            t=t, s_size=s_size, c_sample=c_sample, tau0=tau0,
            tau_growth=1.0 + kappa / 3.0, trials=math.ceil(c_big * math.log(n)),
            c_big=c_big, x_cap=x_cap, eps_gate=phi * kappa**2 / 100.0,
            profile="paper", master_seed=int(master_seed),
        )

    @staticmethod
    def _sample_size(n, k, phi, eps, c_sample):
        eps_eff = max(eps, phi / n)  # paper's eps = Omega(phi/n) floor
        raw = c_sample * k * k * max(1.0, math.log(k)) * math.log(n)
        return int(round(raw / math.sqrt(eps_eff / phi)))

    @property
    def tau_ladder(self) -> np.ndarray:
        """tau_j = tau0 * growth^j for j = 0..J, J = max{j : tau_j <= 1};
        empty when tau0 > 1."""
        if self.tau0 > 1.0:
            return np.empty(0)
        big_j = int(math.floor(math.log(1.0 / self.tau0) / math.log(self.tau_growth)))
        taus = self.tau0 * self.tau_growth ** np.arange(big_j + 1)
        return taus[taus <= 1.0 + 1e-12]

    def weight_threshold(self, tau: float) -> float:
        return (1.0 - self.kappa) / (tau * self.n)

    def size_floor(self, tau: float, sample_count: int) -> float:
        return (1.0 - self.kappa) * tau * sample_count

    def rcp_params(self) -> RcpParams:
        return RcpParams(
            theta=self.theta0, delta=self.delta0, t=self.t,
            c_big=self.c_big, trials=self.trials, x_cap=self.x_cap,
        )


@dataclass
class SimilarityGraph:
    """Weighted graph on the sample; a missing edge means the pair's
    collision estimate aborted."""

    vertices: np.ndarray
    weights: dict[tuple[int, int], float] = field(default_factory=dict)

    def __post_init__(self):
        vset = set(int(v) for v in self.vertices)
        for (u, v), w in self.weights.items():
            if u >= v or u not in vset or v not in vset:
                raise ValueError(f"bad similarity edge ({u},{v})")
            if w < 0:
                raise ValueError(f"negative similarity weight on ({u},{v})")

    def weight(self, u: int, v: int) -> float | None:
        return self.weights.get((u, v) if u < v else (v, u))


@dataclass(frozen=True)
class Core:
    """A mined clique standing in for one cluster."""

    members: tuple[int, ...]
    level: int
    tau: float
    weight_threshold: float
    size_floor: float


@dataclass
class OracleState:
    """The learned artifact; sole input (with the graph) to query answering."""

    params: OracleParams
    sample: np.ndarray
    hgraph: SimilarityGraph | None
    cores: list[Core]
    failed: bool
    fail_reason: str | None = None

    def __post_init__(self):
        if not self.failed:
            if not 1 <= len(self.cores) <= self.params.k:
                raise ValueError("non-failed state must carry 1..k cores")
            seen: set[int] = set()
            for core in self.cores:
                members = set(core.members)
                if seen & members:
                    raise ValueError("cores must be pairwise disjoint")
                seen |= members

    # -- serialization ----------------------------------------------------

    def save(self, path) -> None:
        p = self.params
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(STATE_HEADER + "\n")
            fh.write("PARAMS\n")
            for name in (
                "n", "k", "t", "s_size", "trials", "x_cap", "master_seed",
            ):
                fh.write(f"{name} {getattr(p, name)}\n")
            for name in (
                "phi", "eps", "kappa", "theta0", "delta0", "c_sample",
                "tau0", "tau_growth", "c_big", "eps_gate",
            ):
                fh.write(f"{name} {getattr(p, name):.17g}\n")
            fh.write(f"profile {p.profile}\n")
            fh.write(f"failed {int(self.failed)}\n")
            if self.fail_reason:
                fh.write(f"fail_reason {self.fail_reason}\n")
            fh.write("SAMPLE\n")
            fh.write(" ".join(str(int(v)) for v in self.sample) + "\n")
            fh.write("EDGES\n")
            if self.hgraph is not None:
                for (u, v), w in sorted(self.hgraph.weights.items()):
                    fh.write(f"{u} {v} {w:.17g}\n")
            fh.write("CORES\n")
            for core in self.cores:
                fh.write(f"level {core.level} members " + " ".join(map(str, core.members)) + "\n")
            fh.write("SEED\n")
            fh.write(f"{p.master_seed}\n")

    @classmethod
    def load(cls, path) -> "OracleState":
        with open(path, "r", encoding="utf-8") as fh:
            lines = [ln.rstrip("\n") for ln in fh]
        if not lines or lines[0] != STATE_HEADER:
            raise ValueError(f"{path}: not a {STATE_HEADER} file")
        sections: dict[str, list[str]] = {}
        current = None
        for ln in lines[1:]:
            if ln in ("PARAMS", "SAMPLE", "EDGES", "CORES", "SEED"):
                current = ln
                sections[current] = []
            elif current is not None and ln.strip():
                sections[current].append(ln)
        raw: dict[str, str] = {}
        for ln in sections.get("PARAMS", []):
            key, _, val = ln.partition(" ")
            raw[key] = val
        ints = {k: int(raw[k]) for k in ("n", "k", "t", "s_size", "trials", "x_cap", "master_seed")}
        floats = {
            k: float(raw[k])
            for k in ("phi", "eps", "kappa", "theta0", "delta0", "c_sample",
                      "tau0", "tau_growth", "c_big", "eps_gate")
        }
        params = OracleParams(profile=raw["profile"], **ints, **floats)
        sample_lines = sections.get("SAMPLE", [])
        sample = np.array(
            [int(x) for ln in sample_lines for x in ln.split()], dtype=np.int64
        )
        weights = {}
        for ln in sections.get("EDGES", []):
            u, v, w = ln.split()
            weights[(int(u), int(v))] = float(w)
        hgraph = SimilarityGraph(sample, weights) if sample.size else None
        failed = bool(int(raw.get("failed", "0")))
        cores = []
        taus = params.tau_ladder
        sample_count = int(sample.size)
        for ln in sections.get("CORES", []):
            toks = ln.split()
            level = int(toks[1])
            members = tuple(int(x) for x in toks[3:])
            tau = float(taus[level])
            cores.append(
                Core(
                    members=members, level=level, tau=tau,
                    weight_threshold=params.weight_threshold(tau),
                    size_floor=params.size_floor(tau, sample_count),
                )
            )
        return cls(
            params=params, sample=sample, hgraph=hgraph, cores=cores,
            failed=failed, fail_reason=raw.get("fail_reason"),
        )


# -- learning phase ---------------------------------------------------------


def learn_core(g: Graph, params: OracleParams, engine: CollisionEngine | None = None) -> OracleState:
    """Sample, estimate pairwise collisions, and mine cores.

    Returns a Failed state when the noise budget gate trips or core
    mining finds no usable core structure (0 or more than k cores).
    Passing the engine lets a ClusterOracle reuse the learning-phase walk
    statistics; results are identical either way.
    """
    if params.n != g.n:
        raise ValueError(f"params were built for n={params.n}, graph has n={g.n}")
    if params.eps > params.eps_gate:
        return OracleState(
            params=params, sample=np.empty(0, dtype=np.int64), hgraph=None,
            cores=[], failed=True, fail_reason="noise-budget",
        )
    if params.s_size >= g.n:
        sample = np.arange(g.n, dtype=np.int64)
    else:
        rng = philox(params.master_seed, "sample")
        sample = np.unique(rng.integers(0, g.n, size=params.s_size))
    if engine is None:
        engine = CollisionEngine(g, params.rcp_params(), params.master_seed)
    hgraph = _build_similarity(engine, sample)
    cores = find_core(hgraph, params)
    if cores is None:
        return OracleState(
            params=params, sample=sample, hgraph=hgraph, cores=[],
            failed=True, fail_reason="find-core",
        )
    return OracleState(params=params, sample=sample, hgraph=hgraph, cores=cores, failed=False)


def _learn_counts(engine: CollisionEngine, sample: np.ndarray, trial: int):
    """(ok flags, float64 counts matrix) of the sample's learn-side walk
    statistics for one trial.  Counts are small integers, so every later
    float64 product/sum is exact and machine-independent."""
    s = sample.size
    ok = np.zeros(s, dtype=bool)
    M = np.zeros((s, engine.g.n))
    for i, v in enumerate(sample):
        st = engine.trial_stats("learn", int(v), trial)
        if not st.fail:
            ok[i] = True
            M[i] = st.counts
    return ok, M


def _build_similarity(engine: CollisionEngine, sample: np.ndarray) -> SimilarityGraph:
    s = sample.size
    x2 = float(engine.x) ** 2
    per_trial = np.full((engine.trials, s, s), np.nan)
    for r in range(engine.trials):
        ok, M = _learn_counts(engine, sample, r)
        vals = (M @ M.T) / x2
        good = np.outer(ok, ok)
        per_trial[r] = np.where(good, vals, np.nan)
    weights: dict[tuple[int, int], float] = {}
    for i in range(s):
        for j in range(i + 1, s):
            vals = per_trial[:, i, j]
            good = vals[~np.isnan(vals)]
            if 2 * good.size > engine.trials:
                good.sort()
                weights[(int(sample[i]), int(sample[j]))] = float(good[(good.size - 1) // 2])
    return SimilarityGraph(sample, weights)


def find_core(hgraph: SimilarityGraph, params: OracleParams) -> list[Core] | None:
    """Greedy core mining over the tau ladder; None means fail.

    For each level j (ascending), keep the edges of the working graph F
    with weight >= (1-kappa)/(tau_j n), scan vertices in ascending id
    order, grow a maximal clique greedily from each vertex, and accept it
    as a core when it has at least (1-kappa) tau_j |S| members; accepted
    cores have their incident edges removed from the level graph and F.
    """
    sample = hgraph.vertices
    s_count = int(sample.size)
    working = dict(hgraph.weights)
    cores: list[Core] = []
    for level, tau in enumerate(params.tau_ladder):
        thresh = params.weight_threshold(tau)
        floor = params.size_floor(tau, s_count)
        adj: dict[int, set[int]] = {int(v): set() for v in sample}
        for (u, v), w in working.items():
            if w >= thresh:
                adj[u].add(v)
                adj[v].add(u)
        for v in sample:
            v = int(v)
            clique = [v]
            for u in sorted(adj[v]):
                if all(u in adj[m] for m in clique):
                    clique.append(u)
            if len(clique) >= floor and len(clique) >= 2:
                members = tuple(sorted(clique))
                cores.append(
                    Core(members=members, level=level, tau=float(tau),
                         weight_threshold=thresh, size_floor=floor)
                )
                dead = set(members)
                for m in members:
                    for nb in adj[m]:
                        adj[nb].discard(m)
                    adj[m] = set()
                working = {e: w for e, w in working.items() if e[0] not in dead and e[1] not in dead}
    if not 1 <= len(cores) <= params.k:
        return None
    return cores


# -- query phase --------------------------------------------------------------


class ClusterOracle:
    """Query answering bound to one (graph, state) pair.

    Answers are memoized per vertex; repeated queries issue no further
    graph queries.  A fresh process rebuilds identical sample-side walk
    statistics from the master seed, so answers replay bit-for-bit.
    """

    def __init__(self, g: Graph, state: OracleState, engine: CollisionEngine | None = None):
        if state.params.n != g.n:
            raise ValueError("state was learned for a different graph size")
        self.g = g
        self.state = state
        self._answers: dict[int, int | None] = {}
        self._engine = engine
        self._sample_trials: list[tuple[np.ndarray, np.ndarray]] | None = None
        if not state.failed:
            if self._engine is None:
                self._engine = CollisionEngine(g, state.params.rcp_params(), state.params.master_seed)
            self._member_cols = [
                np.searchsorted(state.sample, np.array(core.members)) for core in state.cores
            ]

    @classmethod
    def learn(cls, g: Graph, params: OracleParams) -> "ClusterOracle":
        """Learn and bind, sharing walk statistics between the phases."""
        engine = CollisionEngine(g, params.rcp_params(), params.master_seed)
        state = learn_core(g, params, engine=engine)
        return cls(g, state, engine=engine if not state.failed else None)

    def _sample_side(self):
        if self._sample_trials is None:
            self._sample_trials = [
                _learn_counts(self._engine, self.state.sample, r)
                for r in range(self._engine.trials)
            ]
        return self._sample_trials

    def check_core(self, u: int) -> int | None:
        """1-based core index when exactly one core matches, else None
        (Outlier).  An aborted pair estimate counts as a failed threshold."""
        if not 0 <= u < self.g.n:
            raise IndexError(f"vertex {u} out of range")
        if self.state.failed:
            return None
        if u in self._answers:
            return self._answers[u]
        engine = self._engine
        sample = self.state.sample
        x2 = float(engine.x) ** 2
        per_trial = np.full((engine.trials, sample.size), np.nan)
        for r in range(engine.trials):
            su = engine.trial_stats("query", u, r)
            if su.fail:
                continue
            ok, M = self._sample_side()[r]
            vals = (M @ su.counts.astype(np.float64)) / x2
            per_trial[r] = np.where(ok, vals, np.nan)
        rcp_prime = np.full(sample.size, np.nan)
        for i in range(sample.size):
            good = per_trial[:, i][~np.isnan(per_trial[:, i])]
            if 2 * good.size > engine.trials:
                good.sort()
                rcp_prime[i] = good[(good.size - 1) // 2]
        matches = []
        for idx, core in enumerate(self.state.cores):
            cols = self._member_cols[idx]
            vals = rcp_prime[cols]
            if not np.isnan(vals).any() and bool((vals >= core.weight_threshold).all()):
                matches.append(idx + 1)
        answer = matches[0] if len(matches) == 1 else None
        self._answers[u] = answer
        engine.drop("query", u)  # answer memoized; raw counts regenerate if needed
        return answer

    def is_outlier(self, w: int) -> bool:
        return self.check_core(w) is None

    def which_cluster(self, w: int) -> int | None:
        return self.check_core(w)

    def same_cluster(self, x: int, y: int) -> bool:
        a = self.which_cluster(x)
        if a is None:
            return False
        return a == self.which_cluster(y)


def check_core(oracle: ClusterOracle, u: int) -> int | None:
    return oracle.check_core(u)


def is_outlier(oracle: ClusterOracle, w: int) -> bool:
    return oracle.is_outlier(w)


def which_cluster(oracle: ClusterOracle, w: int) -> int | None:
    return oracle.which_cluster(w)


def same_cluster(oracle: ClusterOracle, x: int, y: int) -> bool:
    return oracle.same_cluster(x, y)
