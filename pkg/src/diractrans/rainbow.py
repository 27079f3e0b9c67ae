"""Spread sampling of rainbow matchings between two vertex sets.

The sampler assigns each vertex its own color by a uniform random injection,
lets every vertex nominate a few random incident edges of its color, and
takes a maximum matching of the union. Each matched edge is colored by one
of its endpoints, so the matching is rainbow by construction, and the output
distribution is O(1/t^2)-spread: no particular colored edge appears too
often over repeated runs.
"""

import math

import numpy as np

from . import backend
from ._seeds import np_rng_for, rng_for


class RainbowMatchingSampler:
    """Repeated-use sampler for one fixed instance.

    left and right are disjoint vertex lists of equal size t, colors a list
    of at least 2t color indices (the injection needs that many targets).
    Per-vertex, per-color neighbor lists into the opposite side are padded
    into one array so a trial is a handful of vectorized operations plus a
    Hopcroft-Karp call.
    """

    def __init__(self, family, left, right, colors, eps):
        if set(left) & set(right):
            raise ValueError("left and right sets overlap")
        if len(left) != len(right):
            raise ValueError("left and right sizes differ")
        if len(colors) < len(left) + len(right):
            raise ValueError("need at least |left| + |right| colors")
        if len(set(colors)) != len(colors):
            raise ValueError("duplicate colors")
        self.family = family
        self.left = list(left)
        self.right = list(right)
        self.colors = list(colors)
        self.eps = eps
        self.t = len(left)
        self.k = math.ceil(2 / eps)

        verts = self.left + self.right
        sides = [self.right] * self.t + [self.left] * self.t
        rows = []
        for w, other in zip(verts, sides):
            per_color = []
            for c in self.colors:
                row = family.masks[c][w]
                per_color.append([j for j, x in enumerate(other) if (row >> x) & 1])
            rows.append(per_color)
        dmax = max(
            (len(r) for per in rows for r in per), default=0
        )
        self.dmax = max(dmax, 1)
        nbr = np.full((2 * self.t, len(colors), self.dmax), -1, dtype=np.int32)
        for wi, per in enumerate(rows):
            for ci, r in enumerate(per):
                nbr[wi, ci, : len(r)] = r
        self.nbr = nbr

    def sample(self, rng):
        """One trial. Returns (matching, sigma); matching may be short."""
        t, k = self.t, self.k
        sigma = rng.choice(len(self.colors), size=2 * t, replace=False)
        rows = self.nbr[np.arange(2 * t), sigma]  # (2t, dmax)
        valid = rows >= 0
        keys = rng.random((2 * t, self.dmax))
        keys[~valid] = np.inf
        take = min(k, self.dmax)
        picked = np.argpartition(keys, take - 1, axis=1)[:, :take]
        chosen = np.take_along_axis(rows, picked, axis=1)  # (2t, take)

        pairs = set()
        for wi in range(t):  # left vertices nominate rights
            for j in chosen[wi]:
                if j >= 0:
                    pairs.add((wi, int(j)))
        for wj in range(t):  # right vertices nominate lefts
            for i in chosen[t + wj]:
                if i >= 0:
                    pairs.add((int(i), wj))

        adj = [[] for _ in range(t)]
        for i, j in pairs:
            adj[i].append(j)
        for a in adj:
            a.sort()
        match_l = backend.hk_matching(t, t, adj)

        out = []
        for i, j in enumerate(match_l):
            if j < 0:
                continue
            u, v = self.left[i], self.right[j]
            cu = self.colors[sigma[i]]
            cv = self.colors[sigma[t + j]]
            c = cu if self.family.has_edge(cu, u, v) else cv
            out.append((u, v, c))
        return out, sigma

    def sample_matching(self, seed, retries=20, min_size=None):
        """Resample until the matching reaches min_size (default (1-4eps)t)."""
        target = (1 - 4 * self.eps) * self.t if min_size is None else min_size
        best = []
        for attempt in range(retries):
            rng = np_rng_for(seed, "rainbow", attempt)
            m, _ = self.sample(rng)
            if len(m) > len(best):
                best = m
            if len(m) + 1e-9 >= target:
                return m, attempt + 1
        raise RuntimeError(
            f"rainbow matching stuck at {len(best)}/{math.ceil(target)} "
            f"after {retries} tries"
        )


def sample_rainbow_matching(family, left, right, colors, eps, seed, retries=20,
                            min_size=None):
    """One-shot convenience wrapper; returns (matching, attempts)."""
    sampler = RainbowMatchingSampler(family, left, right, colors, eps)
    return sampler.sample_matching(seed, retries, min_size)


def probe_containment(sampler, target, trials, seed):
    """Empirical frequency with which repeated samples contain every colored
    edge of target (a list of (u, v, color) triples). Comparing the rate for
    singletons against 20 eps^-1 / t^2 exercises the spread guarantee.
    """
    want = set(target)
    hits = 0
    for i in range(trials):
        rng = np_rng_for(seed, "probe", i)
        m, _ = sampler.sample(rng)
        if want <= set(m):
            hits += 1
    bound = (20 / sampler.eps / sampler.t**2) ** len(want)
    return {
        "trials": trials,
        "hits": hits,
        "rate": hits / trials,
        "spread_bound": bound,
    }


def rainbow_transversal_matching(family, pool, colors, seed, retries=50):
    """A matching inside pool with exactly one edge per listed color.

    Greedy with restarts: shuffle the colors, give each a random edge of its
    graph avoiding vertices taken so far. Returns {color: (u, v)} or raises
    after retries (dense inputs almost always succeed in the first pass).
    """
    pool = list(pool)
    if 2 * len(colors) > len(pool):
        raise ValueError("pool too small for a matching of this many colors")
    for attempt in range(retries):
        rng = rng_for(seed, "transversal-matching", attempt)
        order = list(colors)
        rng.shuffle(order)
        free = list(pool)
        out = {}
        ok = True
        for c in order:
            edge = None
            # rejection sampling first; dense pools accept within a few tries
            for _ in range(200):
                u, v = rng.sample(free, 2)
                if family.has_edge(c, u, v):
                    edge = (min(u, v), max(u, v))
                    break
            if edge is None:
                free_mask = 0
                for x in free:
                    free_mask |= 1 << x
                cands = [
                    (u, v)
                    for u in free
                    for v in _bits(family.masks[c][u] & free_mask)
                    if v > u
                ]
                if not cands:
                    ok = False
                    break
                edge = cands[rng.randrange(len(cands))]
            out[c] = edge
            free.remove(edge[0])
            free.remove(edge[1])
        if ok:
            return out
    raise RuntimeError(f"no rainbow matching on pool after {retries} tries")


def _bits(mask):
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low
