"""Frozen expected values for the worked examples, computed by oracles.

These constants were produced by the brute-force oracles in oracles.py and
frozen before the package implementations existed. Implementation tests
elsewhere assert agreement with the same numbers; this module proves the
oracles themselves still reproduce them.
"""

from itertools import combinations

from oracles import (
    oracle_count_containing,
    oracle_count_transversals,
    oracle_expansion,
    oracle_family_extremal_value,
    oracle_find_transversal,
    oracle_graph_extremal_value,
    oracle_r,
)

FROZEN = {
    "count_all_clique": {3: 6, 4: 72, 5: 1440},
    "r_extremal_n6": 3,
    "r_all_clique_n6": 39,
    "family_scan_extremal_n6": 3,
    "family_scan_6xK6": 18,
    "graph_scan_K8": 6,
    # scan minimum (A = two vertices per clique, matching partners excluded);
    # the worked example's A = one side gives min{6,4} = 4, also extremal
    "graph_scan_2K4_pm": 2,
    "graph_scan_K33": 0,
    "expansion_K8": 12,
    "spread_exact_n5_containing": 144,  # of 1440: probability 0.1
}


def clique_edges(n):
    return [(u, v) for u in range(n) for v in range(u + 1, n)]


def extremal_edges(n):
    """n-1 complete-bipartite colors + cliques-with-matching color."""
    half = n // 2
    bip = [(u, v) for u in range(half) for v in range(half, n)]
    last = [
        (u, v)
        for u, v in combinations(range(n), 2)
        if (u < half) == (v < half)
    ]
    last += [(i, i + half) for i in range(half)]
    return [bip] * (n - 1) + [last]


def test_count_all_clique_small():
    for n, want in FROZEN["count_all_clique"].items():
        fam = [clique_edges(n)] * n
        assert oracle_count_transversals(n, fam) == want


def test_count_formula_matches():
    # ((n-1)!/2) * n! for the all-clique family
    import math

    for n in (3, 4, 5):
        want = (math.factorial(n - 1) // 2) * math.factorial(n)
        assert FROZEN["count_all_clique"][n] == want


def test_find_three_triangles():
    fam = [clique_edges(3)] * 3
    got = oracle_find_transversal(3, fam)
    assert got is not None
    cyc, cols = got
    assert sorted(cyc) == [0, 1, 2] and sorted(cols) == [0, 1, 2]


def test_find_empty_color_is_none():
    fam = [clique_edges(3), clique_edges(3), []]
    assert oracle_find_transversal(3, fam) is None


def test_find_extremal_n6():
    assert oracle_find_transversal(6, extremal_edges(6)) is not None


def test_r_values():
    assert oracle_r(6, extremal_edges(6)) == FROZEN["r_extremal_n6"]
    fam = [clique_edges(6)] * 6
    assert oracle_r(6, fam) == FROZEN["r_all_clique_n6"]


def test_family_scans():
    assert (
        oracle_family_extremal_value(6, extremal_edges(6))
        == FROZEN["family_scan_extremal_n6"]
    )
    fam = [clique_edges(6)] * 6
    assert oracle_family_extremal_value(6, fam) == FROZEN["family_scan_6xK6"]
    # thresholds from the worked examples
    assert FROZEN["family_scan_extremal_n6"] <= 0.1 * 6 * 36
    assert FROZEN["family_scan_6xK6"] > 0.05 * 6 * 36


def test_graph_scans():
    assert oracle_graph_extremal_value(8, clique_edges(8)) == FROZEN["graph_scan_K8"]
    two_k4 = [
        (u, v)
        for u, v in combinations(range(8), 2)
        if (u < 4) == (v < 4)
    ] + [(i, i + 4) for i in range(4)]
    assert oracle_graph_extremal_value(8, two_k4) == FROZEN["graph_scan_2K4_pm"]
    assert FROZEN["graph_scan_2K4_pm"] <= 0.1 * 64  # extremal at alpha=0.1
    # the worked example's witness half-set: one clique side
    from oracles import _e_cross, _e_inside

    side = set(range(4))
    assert _e_inside(two_k4, side) == 6
    assert _e_cross(two_k4, side, set(range(8)) - side) == 4
    k33 = [(u, v) for u in range(3) for v in range(3, 6)]
    assert oracle_graph_extremal_value(6, k33) == FROZEN["graph_scan_K33"]


def test_expansion_k8():
    got = oracle_expansion(8, clique_edges(8))
    assert got == FROZEN["expansion_K8"]
    assert got >= (0.05 / 3) * 64  # the guarantee it certifies


def test_exceptional_thresholds():
    assert FROZEN["r_extremal_n6"] <= 0.1 * 36
    assert FROZEN["r_all_clique_n6"] > 0.1 * 36


def test_spread_exact_containing():
    fam = [clique_edges(5)] * 5
    got = oracle_count_containing(5, fam, (0, 1), 0)
    assert got == FROZEN["spread_exact_n5_containing"]
    assert got / FROZEN["count_all_clique"][5] == 0.1
