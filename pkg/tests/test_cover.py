"""Path-cover construction: both modes, preconditions, validator."""

import pytest

from diractrans.cover import (
    CoverDownError,
    PathCover,
    check_cover_preconditions,
    cover_down,
    validate_path_cover,
)
from diractrans.families import all_clique_family, random_dirac_family

PARAMS = dict(beta=0.4, gamma=0.35, eps=0.1, cap_hi=0.25)


@pytest.fixture(scope="module")
def clique390():
    return all_clique_family(390)


@pytest.fixture(scope="module")
def dense400():
    return random_dirac_family(400, 160, 0.9, seed=11)


def u_v_blocks():
    return list(range(300)), list(range(300, 390))


def test_clique_staged_cover(clique390):
    u, v = u_v_blocks()
    colors = list(range(318))  # budget 18: staged construction
    pc = cover_down(clique390, u, v, [], colors, PARAMS, seed=5)
    assert validate_path_cover(pc, clique390) == []
    assert pc.meta["mode"] == "staged"
    assert len(pc.paths) == 18
    covered = {x for p in pc.paths for x in p[1:-1]}
    assert covered == set(u)


def test_clique_merge_cover(clique390):
    u, v = u_v_blocks()
    colors = list(range(305))  # budget 5: too small for parts, merges
    pc = cover_down(clique390, u, v, [], colors, PARAMS, seed=5)
    assert validate_path_cover(pc, clique390) == []
    assert pc.meta["mode"] == "merge"
    assert len(pc.paths) == 5
    assert pc.meta["c_dd"] == 0


@pytest.mark.parametrize("ncolors", [305, 310, 318])
def test_path_count_identity(clique390, ncolors):
    u, v = u_v_blocks()
    pc = cover_down(clique390, u, v, [], list(range(ncolors)), PARAMS, seed=1)
    assert len(pc.paths) == ncolors - 300
    assert validate_path_cover(pc, clique390) == []


def test_matching_rides_inside_paths(clique390):
    u, v = u_v_blocks()
    m = [(0, 1), (2, 3), (4, 5), (10, 20), (30, 40)]
    colors = list(range(313))  # 313 + 5 - 300 = 18
    pc = cover_down(clique390, u, v, m, colors, PARAMS, seed=9)
    assert validate_path_cover(pc, clique390) == []
    assert pc.meta["mode"] == "staged"
    edges = {
        (min(a, b), max(a, b))
        for p in pc.paths
        for a, b in zip(p, p[1:])
    }
    for e in m:
        assert e in edges
        assert e not in pc.coloring  # virtual edges stay uncolored


def test_matching_vertex_outside_u(clique390):
    u, v = u_v_blocks()
    with pytest.raises(ValueError, match="outside U"):
        cover_down(clique390, u, v, [(0, 350)], list(range(319)), PARAMS, 0)


def test_zero_color_balance_rejected(clique390):
    u, v = u_v_blocks()
    with pytest.raises(ValueError, match="color balance 0 below"):
        cover_down(clique390, u, v, [], list(range(300)), PARAMS, 0)


def test_balance_cap_and_2b_guard(clique390):
    u, v = u_v_blocks()
    # 90-vertex V: cap_hi*|V| = 22.5 and 2b <= 90; budget 40 breaks both
    with pytest.raises(ValueError, match="color balance 40"):
        cover_down(clique390, u, v, [], list(range(340)), PARAMS, 0)


def test_ratio_window(clique390):
    u = list(range(300))
    v = list(range(300, 330))  # 30 < (1-beta)*beta*300 = 72
    with pytest.raises(ValueError, match="outside window"):
        cover_down(clique390, u, v, [], list(range(306)), PARAMS, 0)
    relaxed = dict(PARAMS, relax_ratio=True)
    pc = cover_down(clique390, u, v, [], list(range(306)), relaxed, seed=2)
    assert validate_path_cover(pc, clique390) == []
    assert pc.meta["relax_ratio"] is True


def test_duplicate_colors_rejected(clique390):
    u, v = u_v_blocks()
    bad = list(range(317)) + [0]
    with pytest.raises(ValueError, match="duplicate colors"):
        cover_down(clique390, u, v, [], bad, PARAMS, 0)


def test_overlapping_blocks_rejected(clique390):
    u, v = u_v_blocks()
    report = check_cover_preconditions(
        clique390, u, [299] + v[1:], [], list(range(318)), PARAMS
    )
    assert any("overlap" in r for r in report)


def test_validator_catches_reuse_and_escape(clique390):
    # handmade cover on U = {0..3}, V = {4..7}: paths share vertex 1
    pc = PathCover(
        paths=((4, 0, 1, 5), (6, 1, 2, 3, 7)),
        coloring={},
        u_block=(0, 1, 2, 3),
        v_block=(4, 5, 6, 7),
        matching=(),
        colors=(),
        meta={},
    )
    report = validate_path_cover(pc, clique390)
    assert any("not disjoint" in r for r in report)

    pc2 = PathCover(
        paths=((4, 0, 5, 1, 6),),
        coloring={},
        u_block=(0, 1),
        v_block=(4, 5, 6),
        matching=(),
        colors=(),
        meta={},
    )
    report2 = validate_path_cover(pc2, clique390)
    assert any("interior 5 outside U" in r for r in report2)


def test_validator_catches_colored_virtual_edge(clique390):
    u, v = u_v_blocks()
    m = [(0, 1)]
    pc = cover_down(clique390, u, v, m, list(range(317)), PARAMS, seed=3)
    assert validate_path_cover(pc, clique390) == []
    pc.coloring[(0, 1)] = 316  # tamper: color the virtual edge
    report = validate_path_cover(pc, clique390)
    assert any("virtual edge" in r for r in report)


def test_validator_catches_wrong_color(clique390):
    u, v = u_v_blocks()
    pc = cover_down(clique390, u, v, [], list(range(318)), PARAMS, seed=3)
    e = next(iter(pc.coloring))
    pc.coloring[e] = 999
    report = validate_path_cover(pc, clique390)
    assert any("outside the block" in r for r in report)


def test_level_one_shape(dense400):
    # vortex level 1: |U| = 140, |V| = 160, 38 virtual edges, 120 colors
    u = list(range(140))
    v = list(range(140, 300))
    m = [(2 * i, 2 * i + 1) for i in range(38)]
    colors = list(range(120))
    params = dict(PARAMS, relax_ratio=True)
    pc = cover_down(dense400, u, v, m, colors, params, seed=21)
    assert validate_path_cover(pc, dense400) == []
    assert len(pc.paths) == 18
    assert pc.meta["mode"] == "staged"


def test_level_four_shape(dense400):
    # vortex level N-1: |U| = 26, |V| = 10, 3 virtual edges, 24 colors
    u = list(range(26))
    v = list(range(26, 36))
    m = [(0, 1), (2, 3), (4, 5)]
    colors = list(range(24))
    pc = cover_down(dense400, u, v, m, colors, PARAMS, seed=21)
    assert validate_path_cover(pc, dense400) == []
    assert len(pc.paths) == 1
    assert pc.meta["mode"] == "merge"
    path = pc.paths[0]
    assert set(path[1:-1]) == set(u)
    assert path[0] in set(v) and path[-1] in set(v)


def test_every_color_used_once(clique390):
    u, v = u_v_blocks()
    pc = cover_down(clique390, u, v, [], list(range(316)), PARAMS, seed=8)
    used = sorted(pc.coloring.values())
    assert used == list(range(316))


def test_deterministic_given_seed(dense400):
    u = list(range(26))
    v = list(range(26, 36))
    m = [(0, 1), (2, 3), (4, 5)]
    a = cover_down(dense400, u, v, m, list(range(24)), PARAMS, seed=4)
    b = cover_down(dense400, u, v, m, list(range(24)), PARAMS, seed=4)
    assert a.paths == b.paths
    assert a.coloring == b.coloring


def test_endpoint_pairs(clique390):
    u, v = u_v_blocks()
    pc = cover_down(clique390, u, v, [], list(range(310)), PARAMS, seed=6)
    pairs = pc.endpoint_pairs()
    assert len(pairs) == len(pc.paths)
    for (a, b), p in zip(pairs, pc.paths):
        assert (a, b) == (p[0], p[-1])
