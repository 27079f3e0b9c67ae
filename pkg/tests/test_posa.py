import random

import pytest

from diractrans.families import graph_from_edges, random_graph
from diractrans.posa import (
    exact_hamilton_with_matching,
    final_step_graph,
    hamilton_path,
    robust_hamilton,
    rotate,
)


def _assert_cycle(n, adj, matching, order):
    assert sorted(order) == list(range(n))
    edges = set()
    for i in range(n):
        u, v = order[i], order[(i + 1) % n]
        assert (adj[u] >> v) & 1
        edges.add(frozenset((u, v)))
    for e in matching:
        assert frozenset(e) in edges


def _assert_path(n, adj, matching, order):
    assert sorted(order) == list(range(n))
    edges = set()
    for u, v in zip(order, order[1:]):
        assert (adj[u] >> v) & 1
        edges.add(frozenset((u, v)))
    for e in matching:
        assert frozenset(e) in edges


def test_rotate_contract():
    adj = graph_from_edges(4, [(0, 1), (1, 2), (2, 3), (1, 3)])
    out = rotate([0, 1, 2, 3], 1, adj, {2: 3, 3: 2})
    assert out == [0, 1, 3, 2]


def test_rotate_errors():
    adj = graph_from_edges(4, [(0, 1), (1, 2), (2, 3), (1, 3)])
    with pytest.raises(ValueError, match="matching edge"):
        rotate([0, 1, 2, 3], 1, adj, {1: 2, 2: 1})
    with pytest.raises(ValueError, match="pivot edge"):
        rotate([0, 1, 2, 3], 0, adj, {})
    with pytest.raises(ValueError, match="not on path"):
        rotate([0, 1, 2], 3, adj, {})
    with pytest.raises(ValueError, match="too close"):
        rotate([0, 1, 2, 3], 2, adj, {})


def test_k6_with_one_forced_edge():
    adj = [((1 << 6) - 1) & ~(1 << v) for v in range(6)]
    res = robust_hamilton(6, adj, [(0, 1)], seed=1)
    assert res.found
    _assert_cycle(6, adj, [(0, 1)], res.order)


def test_k6_with_perfect_forced_matching():
    adj = [((1 << 6) - 1) & ~(1 << v) for v in range(6)]
    m = [(0, 1), (2, 3), (4, 5)]
    res = robust_hamilton(6, adj, m, seed=2)
    assert res.found
    _assert_cycle(6, adj, m, res.order)


def test_disconnected_obstruction():
    adj = graph_from_edges(
        6, [(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5)]
    )
    res = robust_hamilton(6, adj, seed=0)
    assert not res.found
    assert res.obstruction == "disconnected"


def test_low_degree_obstruction():
    adj = graph_from_edges(4, [(0, 1), (1, 2), (2, 3), (1, 3)])
    res = robust_hamilton(4, adj, seed=0)
    assert not res.found
    assert "degree" in res.obstruction


def test_bad_matching_inputs():
    adj = [((1 << 5) - 1) & ~(1 << v) for v in range(5)]
    with pytest.raises(ValueError, match="share a vertex"):
        robust_hamilton(5, adj, [(0, 1), (1, 2)], seed=0)
    sparse = graph_from_edges(5, [(0, 1), (1, 2), (2, 3), (3, 4), (4, 0)])
    with pytest.raises(ValueError, match="not in graph"):
        robust_hamilton(5, sparse, [(0, 2)], seed=0)


def test_agrees_with_exact_on_random_instances():
    for t in range(25):
        rng = random.Random(6000 + t)
        adj = random_graph(9, 0.5, seed=6000 + t)
        # forced matching from present edges
        edges = [
            (u, v)
            for u in range(9)
            for v in range(u + 1, 9)
            if (adj[u] >> v) & 1
        ]
        rng.shuffle(edges)
        m, seen = [], set()
        for u, v in edges:
            if len(m) == 2:
                break
            if u not in seen and v not in seen:
                m.append((u, v))
                seen |= {u, v}
        exact = exact_hamilton_with_matching(9, adj, m)
        res = robust_hamilton(9, adj, m, seed=t, restarts=500)
        if exact is None:
            assert not res.found
        else:
            assert res.found
            _assert_cycle(9, adj, m, res.order)


def test_n60_reliability():
    ok = 0
    for t in range(50):
        adj = random_graph(60, 0.55, seed=7000 + t)
        rng = random.Random(t)
        edges = [
            (u, v)
            for u in range(60)
            for v in range(u + 1, 60)
            if (adj[u] >> v) & 1
        ]
        rng.shuffle(edges)
        m, seen = [], set()
        for u, v in edges:
            if len(m) == 5:
                break
            if u not in seen and v not in seen:
                m.append((u, v))
                seen |= {u, v}
        res = robust_hamilton(60, adj, m, seed=t)
        if res.found:
            _assert_cycle(60, adj, m, res.order)
            ok += 1
    assert ok == 50


def test_hamilton_path_fixed_endpoints():
    adj = [((1 << 7) - 1) & ~(1 << v) for v in range(7)]
    res = hamilton_path(7, adj, s=2, t=5, seed=3)
    assert res.found
    assert res.order[0] == 2 and res.order[-1] == 5
    _assert_path(7, adj, [], res.order)

    res = hamilton_path(7, adj, s=4, seed=4)
    assert res.found and res.order[0] == 4

    res = hamilton_path(7, adj, seed=5)
    assert res.found
    _assert_path(7, adj, [], res.order)

    with pytest.raises(ValueError):
        hamilton_path(7, adj, s=1, t=1)


def test_hamilton_path_through_matching():
    adj = [((1 << 7) - 1) & ~(1 << v) for v in range(7)]
    res = hamilton_path(7, adj, s=2, t=5, matching=[(0, 1)], seed=6)
    assert res.found
    _assert_path(7, adj, [(0, 1)], res.order)


def test_exact_checker():
    cyc = graph_from_edges(6, [(i, (i + 1) % 6) for i in range(6)])
    out = exact_hamilton_with_matching(6, cyc, [(0, 1), (2, 3)])
    assert out is not None
    path3 = graph_from_edges(3, [(0, 1), (1, 2)])
    assert exact_hamilton_with_matching(3, path3) is None
    with pytest.raises(ValueError):
        exact_hamilton_with_matching(13, [0] * 13)


def test_final_step_graph_threshold():
    from diractrans.families import ColoredFamily

    g1 = graph_from_edges(4, [(0, 1), (1, 2)])
    g2 = graph_from_edges(4, [(0, 1), (2, 3)])
    g3 = graph_from_edges(4, [(0, 1), (1, 2), (2, 3)])
    fam = ColoredFamily(4, [tuple(g1), tuple(g2), tuple(g3)])
    rows = final_step_graph(fam, [0, 1, 2], threshold=2)
    assert (rows[0] >> 1) & 1  # (0,1) in all three
    assert (rows[1] >> 2) & 1  # (1,2) in two
    assert (rows[2] >> 3) & 1  # (2,3) in two
    rows3 = final_step_graph(fam, [0, 1, 2], threshold=3)
    assert (rows3[0] >> 1) & 1
    assert not (rows3[1] >> 2) & 1


def test_deterministic_under_seed():
    adj = random_graph(20, 0.6, seed=42)
    a = robust_hamilton(20, adj, seed=9)
    b = robust_hamilton(20, adj, seed=9)
    assert a.order == b.order
