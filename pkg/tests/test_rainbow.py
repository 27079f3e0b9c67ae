import random

import pytest

from diractrans.families import ColoredFamily, all_clique_family
from diractrans.rainbow import (
    RainbowMatchingSampler,
    probe_containment,
    rainbow_transversal_matching,
    sample_rainbow_matching,
)


def _bipartite_family(t, m, p=1.0, seed=0, floor=None):
    """Colors between sides {0..t-1} and {t..2t-1}; each left vertex keeps a
    random right-neighborhood of size floor (default: complete)."""
    n = 2 * t
    rng = random.Random(seed)
    masks = []
    for _ in range(m):
        g = [0] * n
        for u in range(t):
            if floor is None:
                nbrs = range(t, n)
            else:
                nbrs = rng.sample(range(t, n), floor)
            for v in nbrs:
                g[u] |= 1 << v
                g[v] |= 1 << u
        masks.append(tuple(g))
    return ColoredFamily(n, masks)


def _check_matching(fam, left, right, m, eps, t):
    assert len(m) >= (1 - 4 * eps) * t - 1e-9
    used_v = set()
    used_c = set()
    for u, v, c in m:
        assert u in left and v in right
        assert fam.has_edge(c, u, v)
        assert u not in used_v and v not in used_v
        assert c not in used_c
        used_v |= {u, v}
        used_c.add(c)


def test_complete_bipartite_reaches_full_size():
    t, eps = 12, 0.1
    fam = _bipartite_family(t, 2 * t)
    left, right = list(range(t)), list(range(t, 2 * t))
    m, attempts = sample_rainbow_matching(
        fam, left, right, list(range(2 * t)), eps, seed=5
    )
    _check_matching(fam, set(left), set(right), m, eps, t)
    assert attempts == 1


def test_sparse_bipartite_hits_target():
    t, eps = 24, 0.1
    # degree floor 16 = 2(1/2 + eps) t / ... comfortably above (1/2 - eps) t
    fam = _bipartite_family(t, 2 * t, seed=11, floor=16)
    left, right = list(range(t)), list(range(t, 2 * t))
    m, _ = sample_rainbow_matching(
        fam, left, right, list(range(2 * t)), eps, seed=7
    )
    _check_matching(fam, set(left), set(right), m, eps, t)


def test_input_validation():
    t = 4
    fam = _bipartite_family(t, 2 * t)
    left, right = list(range(t)), list(range(t, 2 * t))
    with pytest.raises(ValueError):
        RainbowMatchingSampler(fam, left, left, list(range(8)), 0.1)
    with pytest.raises(ValueError):
        RainbowMatchingSampler(fam, left, right[:-1], list(range(8)), 0.1)
    with pytest.raises(ValueError):
        RainbowMatchingSampler(fam, left, right, list(range(7)), 0.1)
    with pytest.raises(ValueError):
        RainbowMatchingSampler(fam, left, right, [0] * 8, 0.1)


def test_deterministic_under_seed():
    t = 8
    fam = _bipartite_family(t, 2 * t, seed=3, floor=6)
    left, right = list(range(t)), list(range(t, 2 * t))
    a, _ = sample_rainbow_matching(fam, left, right, list(range(2 * t)), 0.1, seed=9)
    b, _ = sample_rainbow_matching(fam, left, right, list(range(2 * t)), 0.1, seed=9)
    assert a == b


def test_probe_reports_rates():
    t = 8
    fam = _bipartite_family(t, 2 * t)
    left, right = list(range(t)), list(range(t, 2 * t))
    sampler = RainbowMatchingSampler(fam, left, right, list(range(2 * t)), 0.1)
    ref, _ = sampler.sample_matching(seed=1)
    rep = probe_containment(sampler, [ref[0]], trials=300, seed=2)
    assert rep["trials"] == 300
    assert 0 <= rep["rate"] <= 1
    assert rep["spread_bound"] == 20 / 0.1 / t**2


def test_transversal_matching_on_clique():
    fam = all_clique_family(10)
    out = rainbow_transversal_matching(fam, range(10), [0, 1, 2], seed=4)
    assert set(out) == {0, 1, 2}
    seen = set()
    for c, (u, v) in out.items():
        assert fam.has_edge(c, u, v)
        assert not {u, v} & seen
        seen |= {u, v}


def test_transversal_matching_failures():
    fam = all_clique_family(6)
    with pytest.raises(ValueError):
        rainbow_transversal_matching(fam, range(5), [0, 1, 2], seed=0)
    # one empty color can never be matched
    empty = ColoredFamily(6, [fam.masks[0], (0,) * 6])
    with pytest.raises(RuntimeError):
        rainbow_transversal_matching(empty, range(6), [0, 1], seed=0, retries=2)
