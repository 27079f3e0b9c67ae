import pytest

from diractrans.extremal import (
    compute_r,
    expansion_check,
    expansion_value,
    family_halfset_value,
    graph_halfset_value,
    is_exceptional,
    is_family_extremal,
    is_graph_extremal,
    preservation_experiment,
    r_value_at,
)
from diractrans.families import (
    ColoredFamily,
    all_clique_family,
    bipartite_mask,
    extremal_construction,
    random_dirac_family,
    random_graph,
)

from oracles import (
    oracle_expansion,
    oracle_family_extremal_value,
    oracle_graph_extremal_value,
    oracle_r,
)

from diractrans.families import graph_edges


def _edge_lists(fam):
    return [graph_edges(g) for g in fam.masks]


def test_graph_scan_matches_oracle_on_random_graphs():
    # the exact scan and the independent brute force must agree everywhere
    for t in range(200):
        n = 4 + t % 5
        adj = random_graph(n, 0.3 + 0.25 * (t % 3), seed=900 + t)
        rep = is_graph_extremal(adj, alpha=0.05, mode="exact")
        assert rep["value"] == oracle_graph_extremal_value(len(adj), graph_edges(adj))
        ins, cr, mn = graph_halfset_value(
            adj, sum(1 << v for v in rep["half_set"])
        )
        assert mn == rep["value"]


def test_family_scan_matches_oracle():
    for t in range(40):
        n = 5 + t % 3
        fam = random_dirac_family(n, n, 0.6, seed=700 + t)
        rep = is_family_extremal(fam, alpha=0.05, mode="exact")
        assert rep["value"] == oracle_family_extremal_value(fam.n, _edge_lists(fam))


def test_compute_r_matches_oracle_small():
    # oracle enumerates every odd color subset; greedy scan must match it
    for t in range(40):
        n = 5 + t % 3
        fam = random_dirac_family(n, n, 0.55, seed=400 + t)
        rep = compute_r(fam, mode="exact")
        assert rep["r"] == oracle_r(fam.n, _edge_lists(fam))
        val, chosen = r_value_at(fam, sum(1 << v for v in rep["half_set"]))
        assert val == rep["r"]
        assert len(chosen) % 2 == 1


def test_extremal_construction_is_extremal_and_exceptional():
    fam = extremal_construction(10)
    rep = is_family_extremal(fam, alpha=0.05, mode="exact")
    assert rep["extremal"]
    side = set(range(5))
    assert set(rep["half_set"]) in (side, set(range(10)) - side)

    exc = is_exceptional(fam, tau=0.1, mode="exact")
    assert exc["exceptional"]
    assert exc["r"] == 5  # the crossing matching in the clique color


def test_all_clique_not_extremal_not_exceptional():
    fam = all_clique_family(8)
    assert not is_family_extremal(fam, alpha=0.05, mode="exact")["extremal"]
    exc = is_exceptional(fam, tau=0.1, mode="exact")
    assert not exc["exceptional"]
    assert exc["r"] == oracle_r(fam.n, _edge_lists(fam))


def test_heuristic_upper_bounds_exact_and_finds_planted():
    fam = extremal_construction(12)
    exact = is_family_extremal(fam, alpha=0.05, mode="exact")
    heur = is_family_extremal(fam, alpha=0.05, mode="heuristic", restarts=10)
    assert not heur["exact"]
    assert heur["value"] >= exact["value"]
    # the planted bipartition is a deep basin; descent should land in it
    assert heur["value"] == exact["value"]
    assert heur["extremal"]

    r_exact = compute_r(fam, mode="exact")
    r_heur = compute_r(fam, mode="heuristic", restarts=10)
    assert r_heur["r"] >= r_exact["r"]
    assert r_heur["r"] == r_exact["r"]


def test_heuristic_consistent_on_random_families():
    for t in range(5):
        fam = random_dirac_family(7, 7, 0.6, seed=50 + t)
        exact = is_family_extremal(fam, alpha=0.05, mode="exact")
        heur = is_family_extremal(fam, alpha=0.05, mode="heuristic", restarts=20)
        assert heur["value"] >= exact["value"]
        # reported value must be the true value of the reported half-set
        a_mask = sum(1 << v for v in heur["half_set"])
        assert family_halfset_value(fam, a_mask) == heur["value"]


def test_exact_mode_rejects_large_n():
    fam = all_clique_family(40, 4)
    with pytest.raises(ValueError):
        is_family_extremal(fam, 0.05, mode="exact")


def test_expansion_matches_oracle():
    for t in range(10):
        adj = random_graph(7, 0.6, seed=300 + t)
        val, a, b = expansion_value(adj)
        assert val == oracle_expansion(len(adj), graph_edges(adj))


def test_expansion_check_k8_holds():
    adj = [((1 << 8) - 1) & ~(1 << v) for v in range(8)]
    rep = expansion_check(adj, alpha=0.05, eps=0.1)
    assert rep["excluded"] is None
    assert rep["value"] == 12
    assert rep["holds"]


def test_expansion_check_excludes_bad_inputs():
    # complete bipartite K_{3,3} is extremal, so the bound does not apply
    side = bipartite_mask(6, range(3))
    k33 = [side[1] if v < 3 else side[0] for v in range(6)]
    rep = expansion_check(k33, alpha=0.05, eps=0.1)
    assert rep["excluded"] == "graph is alpha-extremal"

    cyc = [0] * 8
    for v in range(8):
        cyc[v] |= (1 << ((v + 1) % 8)) | (1 << ((v - 1) % 8))
    rep = expansion_check(cyc, alpha=0.05, eps=0.1)
    assert rep["excluded"] is not None and "degree" in rep["excluded"]


def test_preservation_small():
    rep = preservation_experiment(10, trials=10, alpha=0.1, seed=3)
    assert rep["holds"]
    assert rep["checked"] == 10 * 252
