import pytest

from diractrans.exact import (
    count_transversals,
    find_transversal,
    find_transversal_path,
    pack_edge_disjoint,
    packing_ceiling,
)
from diractrans.families import (
    all_clique_family,
    random_dirac_family,
    validate_transversal,
)

from oracles import oracle_count_transversals, oracle_find_transversal

from diractrans.families import graph_edges


def _edge_lists(fam):
    return [graph_edges(g) for g in fam.masks]


def _random_family(n, m, p, seed):
    # unconstrained ER colors, so "none" outcomes actually occur
    import random

    rng = random.Random(seed)
    masks = []
    for _ in range(m):
        g = [0] * n
        for u in range(n):
            for v in range(u + 1, n):
                if rng.random() < p:
                    g[u] |= 1 << v
                    g[v] |= 1 << u
        masks.append(tuple(g))
    from diractrans.families import ColoredFamily

    return ColoredFamily(n, masks)


def test_find_matches_oracle_on_200_random_families():
    found = none = 0
    for t in range(200):
        n = 4 + t % 4
        fam = _random_family(n, n, (0.25, 0.45, 0.8)[t % 3], seed=1000 + t)
        res = find_transversal(fam)
        expect = oracle_find_transversal(fam.n, _edge_lists(fam))
        assert (res.status == "found") == (expect is not None)
        if res.status == "found":
            found += 1
            assert validate_transversal(fam, res.transversal) == []
        else:
            none += 1
            assert res.status == "none"
    # the mix must exercise both outcomes or the test proves nothing
    assert found > 20 and none > 20


def test_count_matches_oracle():
    for t in range(30):
        n = 4 + t % 3
        fam = _random_family(n, n, 0.6, seed=2000 + t)
        res = count_transversals(fam)
        assert res.status == "found"
        assert res.meta["count"] == oracle_count_transversals(fam.n, _edge_lists(fam))


def test_budget_exhaustion_reports_budget():
    fam = all_clique_family(10)
    res = find_transversal(fam, budget=5)
    assert res.status == "budget"
    assert res.transversal is None
    assert res.nodes >= 5


def test_path_endpoints():
    fam = all_clique_family(5)
    res = find_transversal_path(fam, 0, 3)
    assert res.status == "found"
    t = res.transversal
    assert t.order[0] == 0 and t.order[-1] == 3
    assert validate_transversal(fam, t) == []
    with pytest.raises(ValueError):
        find_transversal_path(fam, 2, 2)


def test_pack_k8_reaches_ceiling():
    fam = all_clique_family(8)
    assert packing_ceiling(fam) == 3
    cycles = pack_edge_disjoint(fam, 3, strategy="greedy")
    assert len(cycles) == 3
    seen = set()
    for t in cycles:
        assert validate_transversal(fam, t) == []
        for e in t.edges():
            key = frozenset(e)
            assert key not in seen
            seen.add(key)


def test_pack_k4_exact_certifies_at_most_one():
    fam = all_clique_family(4)
    cycles = pack_edge_disjoint(fam, 2, strategy="exact")
    assert len(cycles) == 1


def test_pack_k6_exact_finds_two():
    fam = all_clique_family(6)
    cycles = pack_edge_disjoint(fam, 2, strategy="exact")
    assert len(cycles) == 2
    seen = set()
    for t in cycles:
        assert validate_transversal(fam, t) == []
        for e in t.edges():
            assert frozenset(e) not in seen
            seen.add(frozenset(e))


def test_pack_zero_and_bad_strategy():
    fam = all_clique_family(5)
    assert pack_edge_disjoint(fam, 0) == []
    with pytest.raises(ValueError):
        pack_edge_disjoint(fam, 1, strategy="annealed")


def test_pack_greedy_on_random_dirac():
    fam = random_dirac_family(9, 9, 0.8, seed=7)
    cycles = pack_edge_disjoint(fam, 2, strategy="greedy")
    for t in cycles:
        assert validate_transversal(fam, t) == []
