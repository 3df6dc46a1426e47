import math

import numpy as np
import pytest

from subcluster.generators import gen_clusterable
from subcluster.graph_core import Graph
from subcluster.rcp import RcpParams, RcpOutcome, estimate_rcp, exact_rcp, find_set
from subcluster.walks import exact_pbar, exact_qbar

from conftest import random_bounded_graph, random_connected_graph


def graph_with_isolated_vertex(n=120, d=6, seed=1):
    base = random_connected_graph(n - 1, d, seed)
    edges = [(u + 1, v + 1) for u, v in base.edges()]
    return Graph(n, d, edges)  # vertex 0 isolated


# -- exact oracle ---------------------------------------------------------


def test_exact_rcp_disjoint_supports_zero():
    g = Graph(6, 2, [(0, 1), (1, 2), (3, 4), (4, 5)])
    assert exact_rcp(g, 0, 4, 0.1, 8) == 0.0


def test_exact_rcp_bounded_by_qbar():
    # rcp_0(u,v) <= qbar_v^t(u) on random small graphs
    t = 5
    for seed in range(100):
        g = random_bounded_graph(24, 5, seed, target_edges=40)
        rng = np.random.default_rng(seed)
        u, v = (int(x) for x in rng.choice(24, size=2, replace=False))
        assert exact_rcp(g, u, v, 0.0, t) <= exact_qbar(g, v, t)[u] + 1e-15


def test_exact_rcp_monotone_in_theta():
    g = random_connected_graph(30, 5, 3)
    t = 12
    vals = [exact_rcp(g, 2, 9, th, t) for th in (0.0, 0.1, 0.25, 0.4)]
    for a, b in zip(vals, vals[1:]):
        assert b <= a + 1e-15


def test_exact_rcp_symmetric_and_bounded():
    for seed in range(10):
        g = random_bounded_graph(20, 5, seed, target_edges=30)
        rng = np.random.default_rng(seed + 100)
        u, v = (int(x) for x in rng.choice(20, size=2, replace=False))
        a = exact_rcp(g, u, v, 0.1, 6)
        b = exact_rcp(g, v, u, 0.1, 6)
        assert a == pytest.approx(b, abs=1e-15)
        assert 0.0 <= a <= 1.0


# -- find_set -------------------------------------------------------------


def test_find_set_excludes_isolated_start():
    g = graph_with_isolated_vertex()
    f = find_set(g, 0, 0.1, 20, seed=5)
    assert 0 not in f
    assert f.size == g.n - 1  # every other vertex never hit, hence included


def test_find_set_deterministic():
    g = random_connected_graph(80, 6, 4)
    a = find_set(g, 3, 0.1, 30, seed=9)
    b = find_set(g, 3, 0.1, 30, seed=9)
    np.testing.assert_array_equal(a, b)


def test_find_set_on_expander_is_almost_everything():
    # heavy set has at most 2*sqrt(n) vertices; on an expander the exact
    # pbar oracle shows no vertex is heavy, so F misses almost nothing
    n, t = 400, 200
    inst = gen_clusterable(n, 1, 10, 0.0, 2)
    g = inst.graph
    pbar = exact_pbar(g, 7, t)
    assert (pbar > (1 - 0.1) / math.sqrt(n)).sum() <= 2 * math.sqrt(n)
    good = 0
    for seed in range(20):
        f = find_set(g, 7, 0.1, t, seed=seed)
        if f.size >= n - 2 * math.sqrt(n):
            good += 1
    assert good >= 19  # frequency >= 0.95


# -- estimate_rcp ---------------------------------------------------------


def practical_params(n, phi=0.3, trials=7):
    t = int(np.ceil(20 * np.log(n) / phi**2))
    return RcpParams(theta=0.1, delta=0.1, t=t, trials=trials)


def test_estimate_zero_across_components():
    g = Graph(
        60,
        4,
        [(i, i + 1) for i in range(29)] + [(i, i + 1) for i in range(30, 59)] + [(0, 29)] + [(30, 59)],
    )
    params = RcpParams(theta=0.1, delta=0.25, t=40, trials=5)
    out = estimate_rcp(g, 0, 40, params, 3)
    assert not out.aborted
    assert out.value == 0.0


def test_estimate_deterministic_in_seed():
    g = random_connected_graph(100, 6, 8)
    params = RcpParams(theta=0.1, delta=0.2, t=60, trials=5)
    a = estimate_rcp(g, 4, 71, params, 12)
    b = estimate_rcp(g, 4, 71, params, 12)
    assert a == b


def test_estimate_aborts_for_isolated_vertex():
    # all walks from vertex 0 end at 0, which FindSet excludes, so every
    # trial runs out of its 20x budget
    g = graph_with_isolated_vertex()
    params = RcpParams(theta=0.1, delta=0.3, t=10, trials=3)
    out = estimate_rcp(g, 0, 5, params, 4)
    assert out.aborted


def test_estimate_sandwich_on_expander_self_pair():
    # Lemma-1 style bracket against the exact oracle, self pair
    n = 256
    inst = gen_clusterable(n, 1, 10, 0.0, 6)
    g = inst.graph
    params = practical_params(n)
    lo_exact = exact_rcp(g, 9, 9, params.theta, params.t)
    hi_exact = exact_rcp(g, 9, 9, 0.0, params.t)
    delta = params.delta
    ok = 0
    for seed in range(10):
        out = estimate_rcp(g, 9, 9, params, seed)
        if out.aborted:
            continue
        lo = lo_exact - delta * max(lo_exact, 0.5 / n)
        hi = hi_exact + delta * max(hi_exact, 0.5 / n)
        if lo <= out.value <= hi:
            ok += 1
    assert ok >= 9


def test_estimate_separates_planted_clusters():
    # same-cluster estimates sit near the exact oracle value (~0.69/|C|
    # measured on this fixture); cross-cluster estimates stay well below
    inst = gen_clusterable(600, 2, 10, 0.001, 5)
    g = inst.graph
    params = practical_params(600)
    same = estimate_rcp(g, 10, 50, params, 42)
    cross = estimate_rcp(g, 10, 350, params, 42)
    assert not same.aborted and not cross.aborted
    c_size = len(inst.parts[0])
    assert same.value >= 0.55 / c_size
    assert cross.value <= 0.45 / c_size
    exact_same = exact_rcp(g, 10, 50, params.theta, params.t)
    assert same.value == pytest.approx(exact_same, rel=0.25)


# -- parameter plumbing ---------------------------------------------------


def test_params_x_rule_and_cap():
    p = RcpParams(theta=0.1, delta=0.1, t=10)
    assert p.resolve_x(1024) == math.ceil(math.sqrt(1024) / 0.01)
    p_capped = RcpParams(theta=0.1, delta=0.001, t=10, x_cap=10**6)
    assert p_capped.resolve_x(10**6) == 10**6
    assert RcpParams(theta=0.1, delta=0.1, t=10, x=77).resolve_x(4096) == 77


def test_params_trial_rule():
    p = RcpParams(theta=0.1, delta=0.1, t=10)
    assert p.n_trials(1024) == math.ceil(4.0 * math.log(1024))
    assert RcpParams(theta=0.1, delta=0.1, t=10, trials=7).n_trials(1024) == 7


def test_params_validation():
    with pytest.raises(ValueError):
        RcpParams(theta=0.5, delta=0.1, t=10)
    with pytest.raises(ValueError):
        RcpParams(theta=0.1, delta=1.0, t=10)
    with pytest.raises(ValueError):
        RcpParams(theta=0.1, delta=0.1, t=0)
    with pytest.raises(ValueError):
        RcpOutcome.estimate(1.5)
    assert RcpOutcome.abort().aborted
