import numpy as np
import pytest
import scipy.stats

from subcluster.graph_core import Graph
from subcluster.walks import (
    WalkKind,
    exact_p,
    exact_pbar,
    exact_qbar,
    lazy_step,
    sample_endpoints,
    sample_walk,
    transition_matrix,
)

from conftest import cycle_graph, path_graph, random_bounded_graph, random_connected_graph


def indicator(n, v):
    e = np.zeros(n)
    e[v] = 1.0
    return e


def test_lazy_step_degree_two_with_bound_three():
    g = path_graph(3, d=3)
    out = lazy_step(g, indicator(3, 1))
    # stay mass 1 - 2/6 = 2/3, each neighbor 1/6
    assert out == pytest.approx([1 / 6, 2 / 3, 1 / 6])


def test_lazy_step_isolated_vertex_keeps_mass():
    g = Graph(2, 1, [])
    out = lazy_step(g, indicator(2, 0))
    assert out == pytest.approx([1.0, 0.0])


def test_lazy_step_mass_conserved_exactly():
    g = random_bounded_graph(50, 6, 11)
    dist = np.full(50, 1 / 50)
    for _ in range(25):
        dist = lazy_step(g, dist)
        assert abs(dist.sum() - 1.0) < 1e-14
        assert dist.min() >= 0.0


def test_lazy_step_matches_sparse_matrix_route():
    # dual route: scatter-add application vs scipy sparse multiplication
    g = random_bounded_graph(40, 5, 7)
    P = transition_matrix(g)
    rng = np.random.default_rng(0)
    dist = rng.dirichlet(np.ones(40))
    np.testing.assert_allclose(lazy_step(g, dist), dist @ P, atol=1e-15)


def test_exact_p_t0_is_indicator():
    g = cycle_graph(5)
    np.testing.assert_array_equal(exact_p(g, 2, 0), indicator(5, 2))


def test_exact_p_converges_to_uniform_on_connected():
    for seed in (0, 1):
        n = 30
        g = random_connected_graph(n, 5, seed)
        dist = exact_p(g, 0, 10 * n * n)
        tv = 0.5 * np.abs(dist - 1 / n).sum()
        assert tv < 1e-6


def test_exact_p_row_stochastic():
    g = random_bounded_graph(25, 4, 3)
    for v in (0, 7, 24):
        dist = exact_p(g, v, 17)
        assert abs(dist.sum() - 1.0) < 1e-12
        assert dist.min() >= 0.0


def test_exact_pbar_t1_is_indicator():
    g = cycle_graph(6)
    np.testing.assert_array_equal(exact_pbar(g, 3, 1), indicator(6, 3))


def test_exact_pbar_single_edge_closed_form():
    g = Graph(2, 1, [(0, 1)])
    np.testing.assert_allclose(exact_pbar(g, 0, 2), [0.75, 0.25])


def test_exact_pbar_is_average_of_exact_p():
    g = random_bounded_graph(20, 5, 9)
    t = 7
    avg = sum(exact_p(g, 4, ell) for ell in range(t)) / t
    np.testing.assert_allclose(exact_pbar(g, 4, t), avg, atol=1e-14)


def test_exact_qbar_t1_is_indicator():
    g = cycle_graph(6)
    np.testing.assert_array_equal(exact_qbar(g, 0, 1), indicator(6, 0))


def test_qbar_composition_identity():
    # qbar_u(v) = sum_w pbar_u(w) pbar_w(v)
    n, t = 30, 6
    g = random_bounded_graph(n, 5, 13)
    u = 3
    lhs = exact_qbar(g, u, t)
    pbar_rows = np.array([exact_pbar(g, w, t) for w in range(n)])
    rhs = exact_pbar(g, u, t) @ pbar_rows
    assert np.abs(lhs - rhs).max() < 1e-12


def test_qbar_symmetry_on_cycle():
    n, t = 9, 4
    g = cycle_graph(n)
    q = exact_qbar(g, 0, t)
    for j in range(1, n):
        assert q[j] == pytest.approx(q[n - j], abs=1e-14)


def test_transition_eigenvalues_nonnegative():
    # laziness keeps the walk matrix PSD
    for seed in range(4):
        g = random_bounded_graph(24, 5, seed)
        P = transition_matrix(g).toarray()
        assert np.linalg.eigvalsh(P).min() >= -1e-9


def test_sample_walk_uniform_averaging_t1_stays():
    g = cycle_graph(8)
    for seed in range(5):
        assert sample_walk(g, 3, WalkKind.uniform_averaging(1), seed) == 3


def test_sample_walk_deterministic_in_seed():
    g = random_bounded_graph(30, 5, 2)
    kind = WalkKind.two_phase(9)
    a = sample_walk(g, 5, kind, 123)
    b = sample_walk(g, 5, kind, 123)
    assert a == b
    ends1 = sample_endpoints(g, 5, kind, 123, 50)
    ends2 = sample_endpoints(g, 5, kind, 123, 50)
    np.testing.assert_array_equal(ends1, ends2)


def test_sample_endpoints_batch_layout_independent():
    g = random_bounded_graph(30, 5, 2)
    kind = WalkKind.uniform_averaging(7)
    whole = sample_endpoints(g, 4, kind, 9, 64)
    parts = np.concatenate(
        [sample_endpoints(g, 4, kind, 9, 16, w_start=o) for o in (0, 16, 32, 48)]
    )
    np.testing.assert_array_equal(whole, parts)


def test_sample_walk_query_budget():
    g = cycle_graph(16)
    g.queries.reset()
    sample_walk(g, 0, WalkKind.plain(12), 77)
    assert g.queries.count == 12
    g.queries.reset()
    sample_walk(g, 0, WalkKind.uniform_averaging(12), 77)
    assert g.queries.count <= 11  # at most t-1 steps


def _chi_square_vs_exact(g, v, kind, exact, samples=100_000, seed=5):
    ends = sample_endpoints(g, v, kind, seed, samples)
    obs = np.bincount(ends, minlength=g.n).astype(float)
    exp = exact * samples
    keep = exp > 5  # chi-square validity; tail cells pooled
    pooled_obs = np.append(obs[keep], obs[~keep].sum())
    pooled_exp = np.append(exp[keep], exp[~keep].sum())
    if pooled_exp[-1] == 0:
        assert pooled_obs[-1] == 0
        pooled_obs, pooled_exp = pooled_obs[:-1], pooled_exp[:-1]
    stat, p = scipy.stats.chisquare(pooled_obs, pooled_exp)
    return p


def test_sampled_uniform_averaging_matches_exact_pbar():
    n, t = 20, 8
    g = random_connected_graph(n, 5, 21)
    p = _chi_square_vs_exact(g, 2, WalkKind.uniform_averaging(t), exact_pbar(g, 2, t))
    assert p > 0.001


def test_sampled_plain_matches_exact_p():
    n, t = 20, 6
    g = random_connected_graph(n, 5, 22)
    p = _chi_square_vs_exact(g, 0, WalkKind.plain(t), exact_p(g, 0, t))
    assert p > 0.001


def test_sampled_two_phase_matches_exact_qbar():
    n, t = 20, 5
    g = random_connected_graph(n, 5, 23)
    p = _chi_square_vs_exact(g, 7, WalkKind.two_phase(t), exact_qbar(g, 7, t))
    assert p > 0.001


def test_sampled_frequency_within_3_sigma_of_pbar():
    n, t, samples = 16, 6, 100_000
    g = random_connected_graph(n, 5, 24)
    target = exact_pbar(g, 1, t)
    ends = sample_endpoints(g, 1, WalkKind.uniform_averaging(t), 31, samples)
    freq = np.bincount(ends, minlength=n) / samples
    sigma = np.sqrt(target * (1 - target) / samples)
    bad = np.abs(freq - target) > 3 * np.maximum(sigma, 1e-9)
    # a few 3-sigma excursions among n cells are expected; none at 5 sigma
    assert bad.sum() <= max(1, n // 8)
    assert np.all(np.abs(freq - target) <= 5 * np.maximum(sigma, 1e-9))


def test_walk_kind_validation():
    with pytest.raises(ValueError):
        WalkKind.uniform_averaging(0)
    with pytest.raises(ValueError):
        WalkKind("bogus", 3)
    assert WalkKind.plain(0).t == 0
