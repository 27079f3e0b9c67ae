"""Vortex planner, sampler, and absorber verification."""

import dataclasses
import json
import math
from itertools import combinations

import pytest

from diractrans.families import all_clique_family, random_dirac_family
from diractrans.vortex import (
    VortexAbsorber,
    _family_bits,
    _pair_intersections,
    absorber_spread_probe,
    construct_phi,
    plan_vortex_sizes,
    sample_vortex_absorber,
    verify_absorber,
    verify_vortex,
)

PARAMS = dict(
    beta=0.4,
    delta=0.95,
    eps=0.1,
    L=4,
    alpha1=0.005,
    alpha2=0.011,
    kappa=1.02,
    cap_hi=0.25,
)


@pytest.fixture(scope="module")
def clique_sample():
    fam = all_clique_family(400)
    return fam, sample_vortex_absorber(fam, PARAMS, seed=7)


def test_plan_at_400():
    plan = plan_vortex_sizes(400, 0.4, 0.95, 4)
    assert plan["feasible"]
    assert plan["N"] == 5
    assert plan["v_sizes"] == [140, 160, 64, 26, 10]
    assert plan["c_n"] == 11
    assert plan["s_size"] == 9 and plan["r_size"] == 2
    assert plan["m_abs_size"] == 38 and plan["c_abs_size"] == 36
    assert plan["budgets"][-1] == 10 - 9
    assert plan["v1_core"] == 140 - 2 * 38
    assert sum(plan["v_sizes"]) == 400 and sum(plan["c_sizes"]) == 400


@pytest.mark.parametrize("n", [320, 400, 500, 700])
def test_plan_feasible_range(n):
    beta, delta = 0.4, 0.95
    plan = plan_vortex_sizes(n, beta, delta, 4)
    assert plan["feasible"], plan["reasons"]
    N = plan["N"]
    v, c = plan["v_sizes"], plan["c_sizes"]
    for i in range(2, N + 1):  # window (i)
        center = beta ** (i - 1) * n
        assert (1 - beta / 10) * center <= v[i - 1] <= (1 + beta / 10) * center
    for i in range(2, N):  # window (ii)
        center = (1 - beta**3) * v[i - 1]
        assert (1 - beta**4) * center <= c[i - 1] <= (1 + beta**4) * center
    assert 1 / delta <= plan["c_n"] / v[-1] <= 2 / delta
    # the budget chain closes on the forced final value
    b = plan["m_abs_size"]
    for i in range(1, N):
        use = c[i - 1] - (plan["c_abs_size"] if i == 1 else 0)
        b = b + use - v[i - 1]
        assert b == plan["budgets"][i - 1]
        assert 2 * b <= v[i]
    assert b == v[-1] - plan["s_size"]


@pytest.mark.parametrize("n", [30, 64, 100, 250])
def test_plan_infeasible_small(n):
    plan = plan_vortex_sizes(n, 0.4, 0.95, 4)
    assert not plan["feasible"]
    assert plan["reasons"]


def test_pair_intersections_bruteforce():
    fam = random_dirac_family(9, 5, 0.7, seed=2)
    bits = _family_bits(fam)
    verts = [0, 2, 3, 5, 6, 8]
    inter = _pair_intersections(bits, [0, 1, 2, 3, 4], verts)
    vset = set(verts)
    for a in range(5):
        for b in range(5):
            want = sum(
                1
                for u in verts
                for v in verts
                if u < v
                and v in vset
                and fam.has_edge(a, u, v)
                and fam.has_edge(b, u, v)
            )
            assert inter[a, b] == want


def test_sample_matches_plan(clique_sample):
    fam, s = clique_sample
    plan = s.meta["plan"]
    assert [len(b) for b in s.v_blocks] == plan["v_sizes"]
    assert [len(b) for b in s.c_blocks] == plan["c_sizes"]
    assert verify_vortex(fam, s, PARAMS) == []
    assert len(s.m_abs) == plan["m_abs_size"]
    assert len(s.c_abs) == plan["c_abs_size"]
    # M_abs is a matching on distinct vertices inside block 1
    verts = [x for e in s.m_abs for x in e]
    assert len(set(verts)) == 2 * len(s.m_abs)
    assert set(verts) <= set(s.v_blocks[0])
    assert set(s.c_abs) <= set(s.c_blocks[0])


def test_gadget_edges_carry_their_colors(clique_sample):
    fam, s = clique_sample
    for r, e in s.e_r.items():
        assert fam.has_edge(r, *e)
    cn = set(s.r_colors) | set(s.s_colors)
    seen_colors = set()
    for (r, s_col), g in s.gadgets.items():
        assert fam.has_edge(g["c1"], *s.e_r[r])
        assert fam.has_edge(g["c1"], *g["e1"]) and fam.has_edge(g["c2"], *g["e1"])
        assert fam.has_edge(g["c2"], *g["e2"]) and fam.has_edge(s_col, *g["e2"])
        assert g["c1"] not in cn and g["c2"] not in cn
        assert g["c1"] not in seen_colors and g["c2"] not in seen_colors
        seen_colors |= {g["c1"], g["c2"]}
    assert seen_colors == set(s.c_abs)


def test_absorber_exhaustive(clique_sample):
    fam, s = clique_sample
    rep = verify_absorber(fam, s, L=4)
    assert rep["violations"] == []
    assert rep["exhaustive"]
    assert rep["subsets_checked"] == math.comb(11, 9)


def test_absorber_sampled_mode(clique_sample):
    fam, s = clique_sample
    rep = verify_absorber(fam, s, L=4, cap=1, samples=8, seed=5)
    assert not rep["exhaustive"]
    assert rep["subsets_checked"] == 8
    assert rep["violations"] == []


def test_phi_for_every_subset(clique_sample):
    fam, s = clique_sample
    cn = sorted(set(s.r_colors) | set(s.s_colors))
    for A in combinations(cn, len(s.s_colors)):
        phi = construct_phi(fam, s, A)
        assert len(phi) == len(s.m_abs)
        assert set(phi.values()) == set(s.c_abs) | (set(cn) - set(A))


def test_phi_rejects_bad_subset(clique_sample):
    fam, s = clique_sample
    with pytest.raises(ValueError):
        construct_phi(fam, s, list(s.s_colors)[:-1])
    with pytest.raises(ValueError):
        construct_phi(fam, s, list(s.s_colors)[:-1] + [9999])


def test_deleted_edge_always_detected(clique_sample):
    # criterion-style mutation: physically remove one gadget edge
    fam, s = clique_sample
    hits = 0
    victims = list(s.m_abs)[:10]
    for victim in victims:
        broken = dataclasses.replace(
            s, m_abs=tuple(e for e in s.m_abs if e != victim)
        )
        rep = verify_absorber(fam, broken, L=4)
        if rep["violations"]:
            hits += 1
    assert hits == len(victims)


def test_duplicated_color_detected(clique_sample):
    fam, s = clique_sample
    dup = list(s.c_abs)
    dup[0] = dup[1]
    broken = dataclasses.replace(s, c_abs=tuple(dup))
    rep = verify_absorber(fam, broken, L=4)
    assert any("no absorbing bijection" in v for v in rep["violations"])


def test_verify_flags_shifted_blocks(clique_sample):
    fam, s = clique_sample
    vb = [list(b) for b in s.v_blocks]
    moved = vb[-1].pop()
    vb[0].append(moved)
    shifted = dataclasses.replace(
        s, v_blocks=tuple(tuple(sorted(b)) for b in vb)
    )
    bad = verify_vortex(fam, shifted, PARAMS)
    assert any("(i)" in v for v in bad)

    vb = [list(b) for b in s.v_blocks]
    vb[0].append(vb[1][0])  # duplicate
    dup = dataclasses.replace(s, v_blocks=tuple(tuple(sorted(b)) for b in vb))
    assert any("partition" in v for v in verify_vortex(fam, dup, PARAMS))


def test_json_roundtrip(clique_sample):
    _, s = clique_sample
    blob = json.dumps(s.to_json())
    back = VortexAbsorber.from_json(json.loads(blob))
    assert back == s


def test_deterministic_given_seed():
    fam = all_clique_family(400)
    a = sample_vortex_absorber(fam, PARAMS, seed=7)
    b = sample_vortex_absorber(fam, PARAMS, seed=7)
    assert a == b


def test_sample_dense_random_family():
    fam = random_dirac_family(400, 400, 0.9, seed=3)
    s = sample_vortex_absorber(fam, PARAMS, seed=11)
    assert verify_vortex(fam, s, PARAMS) == []
    rep = verify_absorber(fam, s, L=4)
    assert rep["violations"] == []


def test_infeasible_size_raises():
    fam = all_clique_family(64)
    with pytest.raises(ValueError, match="infeasible vortex sizes"):
        sample_vortex_absorber(fam, PARAMS, seed=0)


def test_spread_probe_fields(clique_sample):
    fam, _ = clique_sample
    probe = absorber_spread_probe(fam, PARAMS, trials=2, seed=1)
    assert probe["trials"] == 2
    assert probe["max_rate"] <= 1.0
    assert probe["bound"] == pytest.approx(3 * 4**4 / 400)
    assert probe["max_rate"] <= probe["bound"]
