import numpy as np
import pytest

from subcluster.generators import (
    PERTURB_MODES,
    gen_clusterable,
    load_partition,
    perturb,
    store_partition,
)
from subcluster.graph_core import (
    crossing_edges,
    induced_subgraph,
    load_graph,
    outer_conductance,
    store_graph,
)


def regularized_lambda2(g):
    A = np.zeros((g.n, g.n))
    for u, v in g.edges():
        A[u, v] = A[v, u] = 1.0
    A[np.arange(g.n), np.arange(g.n)] = g.d - g.deg
    return np.linalg.eigvalsh(np.eye(g.n) - A / g.d)[1]


def test_single_cluster_no_crossing():
    inst = gen_clusterable(120, 1, 8, 0.0, 0)
    assert inst.k == 1
    assert outer_conductance(inst.graph, inst.parts[0]) == 0.0


def test_degree_bound_respected():
    for seed in range(4):
        inst = gen_clusterable(210, 3, 9, 0.02, seed)
        assert int(inst.graph.deg.max()) <= 9


def test_intra_degrees_near_regular():
    inst = gen_clusterable(200, 2, 10, 0.0, 1)
    deg = inst.graph.deg
    assert int(deg.min()) >= 10 - 3
    assert int(deg.max()) <= 10 - 2


def test_crossing_targets_reached():
    d, frac = 10, 0.01
    inst = gen_clusterable(300, 3, d, frac, 2)
    for p in inst.parts:
        assert crossing_edges(inst.graph, p) >= int(np.ceil(frac * d * len(p)))


def test_partition_covers_all_vertices():
    inst = gen_clusterable(101, 3, 8, 0.01, 4)
    assert sorted(np.concatenate(inst.parts).tolist()) == list(range(101))


def test_single_cluster_spectral_gap():
    # threshold 0.1 pinned from measurement (observed ~0.27 across seeds)
    good = 0
    for seed in range(20):
        inst = gen_clusterable(500, 1, 10, 0.0, seed)
        if regularized_lambda2(inst.graph) >= 0.1:
            good += 1
    assert good >= 19


def test_generator_deterministic():
    a = gen_clusterable(150, 2, 8, 0.01, 9)
    b = gen_clusterable(150, 2, 8, 0.01, 9)
    assert a.graph == b.graph


def test_infeasible_parameters_rejected():
    with pytest.raises(ValueError):
        gen_clusterable(20, 5, 10, 0.0, 0)  # clusters smaller than d
    with pytest.raises(ValueError):
        gen_clusterable(100, 1, 10, 0.05, 0)  # k=1 cannot cross
    with pytest.raises(ValueError):
        gen_clusterable(100, 2, 3, 0.0, 0)  # d too small


def test_perturb_eps_zero_unchanged():
    inst = gen_clusterable(150, 2, 8, 0.01, 3)
    for mode in PERTURB_MODES:
        out = perturb(inst, 0.0, mode, 11)
        assert out.graph == inst.graph
        assert out.edits_used == 0


@pytest.mark.parametrize("mode", PERTURB_MODES)
def test_perturb_budget_respected(mode):
    inst = gen_clusterable(240, 2, 10, 0.01, 5)
    eps = 0.02
    out = perturb(inst, eps, mode, 13)
    assert out.edits_used <= int(eps * 10 * 240)
    assert int(out.graph.deg.max()) <= 10


@pytest.mark.parametrize("mode", PERTURB_MODES)
def test_perturb_touches_only_intra_edges(mode):
    inst = gen_clusterable(240, 3, 10, 0.01, 6)
    label = inst.part_of()
    before = {(u, v) for u, v in inst.graph.edges() if label[u] != label[v]}
    out = perturb(inst, 0.02, mode, 17)
    after = {(u, v) for u, v in out.graph.edges() if label[u] != label[v]}
    assert before == after
    # and every changed edge is intra-cluster
    changed = set(inst.graph.edges()) ^ set(out.graph.edges())
    assert all(label[u] == label[v] for u, v in changed)


def test_perturb_deterministic():
    inst = gen_clusterable(200, 2, 9, 0.01, 7)
    a = perturb(inst, 0.03, "mixed", 23)
    b = perturb(inst, 0.03, "mixed", 23)
    assert a.graph == b.graph and a.edits_used == b.edits_used


def test_targeted_cut_isolates_block():
    inst = gen_clusterable(300, 2, 10, 0.01, 3)
    out = perturb(inst, 0.02, "delete-targeted-cut", 7)
    idx = int(np.argmax([len(b) for b in out.noise_blocks]))
    block = out.noise_blocks[idx]
    assert block.size >= 2
    part = out.parts[idx]
    sub = induced_subgraph(out.graph, part)
    relabel = {int(v): i for i, v in enumerate(part)}
    cond = outer_conductance(sub, [relabel[int(v)] for v in block])
    assert cond < 0.3 / 2  # below phi/2 for any phi the suite uses


def test_instance_round_trip(tmp_path):
    inst = gen_clusterable(90, 3, 8, 0.02, 8)
    gp, pp = tmp_path / "g.txt", tmp_path / "p.txt"
    store_graph(inst.graph, gp)
    store_partition(inst.parts, pp)
    g2 = load_graph(gp)
    parts2 = load_partition(pp, 90)
    assert g2 == inst.graph
    assert all(np.array_equal(a, b) for a, b in zip(parts2, inst.parts))


def test_partition_file_rejects_bad_header(tmp_path):
    p = tmp_path / "p.txt"
    p.write_text("PARTITION v2\n0 1\n")
    with pytest.raises(ValueError):
        load_partition(p, 2)
