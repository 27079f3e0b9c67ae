"""End-to-end transversal samplers and the route dispatcher.

A transversal Hamilton cycle pairs each of the n colors of a family with
one cycle edge, so every sampler here requires m == n. Three constructive
routes cover the input space:

  non-extremal  vortex absorber, cover-down levels, final rotation step
  extremal      cleanup to a near-complete bipartite core (or two clique
                cores), then staged rainbow paths through the cores
  exceptional   a witness edge of the parity certificate, closed through
                a rainbow Hamilton path on the restricted family

sample_transversal classifies the input and picks a route. Every returned
Transversal has passed validate_transversal, and the meta dict that comes
with it records the route, preset, and retry tallies. Routes are
Las-Vegas: stages that merely run out of luck restart the attempt, while
structural problems (bad preconditions, infeasible plans, a zero parity
invariant) raise immediately.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from ._seeds import derive_seed, rng_for
from .cover import CoverDownError, cover_down
from .exact import find_transversal, find_transversal_path
from .extremal import compute_r, is_exceptional, is_family_extremal
from .families import ColoredFamily, Transversal, validate_transversal
from .matching import max_bipartite_matching
from .posa import final_step_graph, hamilton_path, robust_hamilton
from .presets import DESK
from .vortex import VortexSampleError, _family_bits, plan_vortex_sizes, \
    construct_phi, sample_vortex_absorber

# exact rainbow-path search caps at 64 vertices, so 2t must stay under it
T_EXACT_CAP = 32

# per-vertex edge budget kept by the sparsifying Hamilton-path sampler
SPREAD_DEGREE = 100


class NoTransversalError(ValueError):
    """A parity certificate proves that no transversal exists."""

    def __init__(self, msg, half_set=None, colors=None):
        super().__init__(msg)
        self.half_set = half_set
        self.colors = colors


class _Stuck(RuntimeError):
    """One Las-Vegas stage ran out of luck; the attempt restarts."""

    def __init__(self, stage, detail=""):
        super().__init__(f"{stage}: {detail}" if detail else stage)
        self.stage = stage


def _norm(u, v):
    return (u, v) if u < v else (v, u)


def _bits(mask):
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def _mask_of(vs):
    out = 0
    for v in vs:
        out |= 1 << v
    return out


def _pick_bit(rng, mask):
    k = rng.randrange(mask.bit_count())
    for v in _bits(mask):
        if k == 0:
            return v
        k -= 1
    raise AssertionError("empty mask")


def _tally(t, key):
    t[key] = t.get(key, 0) + 1


# ---------------------------------------------------------------------------
# spread Hamilton paths


def spread_ham_path(rows, a, b, seed=0, retries=8, restarts=200):
    """Sample an a-b Hamilton path through a sparsified copy of a graph.

    rows is a bitmask adjacency. Each attempt keeps up to SPREAD_DEGREE
    random edges per vertex, sprinkles every edge back in independently at
    rate SPREAD_DEGREE/n, and runs the rotation engine on the union; the
    sparse redraw per attempt is what keeps any single edge unlikely to be
    forced. Graphs at or below twice the budget skip sparsification. Pass
    a = b = None for free endpoints.

    Returns (order, meta). Structural obstructions raise ValueError,
    exhausted retries raise RuntimeError.
    """
    n = len(rows)
    if n < 2:
        raise ValueError("need at least two vertices")
    free_ends = a is None and b is None
    if not free_ends:
        if a is None or b is None:
            raise ValueError("fix both endpoints or neither")
        if not (0 <= a < n and 0 <= b < n) or a == b:
            raise ValueError("endpoints must be two distinct vertices")
    tag = "any" if free_ends else f"{a}-{b}"
    for v in range(n):
        need = 1 if (free_ends or v in (a, b)) else 2
        if rows[v].bit_count() < need:
            raise ValueError(
                f"no {tag} hamilton path: vertex {v} has degree "
                f"{rows[v].bit_count()}")
    sparse = n > 2 * SPREAD_DEGREE
    meta = {"n": n, "sparse": sparse, "attempts": 0}
    for attempt in range(retries):
        rng = rng_for(seed, "spread-ham", attempt)
        if sparse:
            sub = [0] * n
            for v in range(n):
                nb = list(_bits(rows[v]))
                if len(nb) > SPREAD_DEGREE:
                    nb = rng.sample(nb, SPREAD_DEGREE)
                for u in nb:
                    sub[v] |= 1 << u
                    sub[u] |= 1 << v
            p = SPREAD_DEGREE / n
            for v in range(n):
                for u in _bits((rows[v] >> (v + 1)) << (v + 1)):
                    if rng.random() < p:
                        sub[v] |= 1 << u
                        sub[u] |= 1 << v
        else:
            sub = list(rows)
        meta["attempts"] = attempt + 1
        res = hamilton_path(
            n, sub, s=a, t=b,
            seed=derive_seed(seed, "spread-ham-posa", attempt),
            restarts=restarts)
        if res.found:
            return list(res.order), meta
        if not sparse and res.obstruction and "restarts" not in res.obstruction:
            raise ValueError(f"no {tag} hamilton path: {res.obstruction}")
    raise RuntimeError(f"no {tag} hamilton path found in {retries} attempts")


# ---------------------------------------------------------------------------
# rainbow Hamilton paths across a near-complete bipartition


def _finish_path(family, order, colseq, vert_set, color_set, meta):
    tv = Transversal("path", tuple(order), tuple(colseq))
    bad = validate_transversal(family, tv, spanning=False)
    assert not bad, f"sampled path failed validation: {bad[:3]}"
    assert set(order) == vert_set, "path must cover the frame vertices"
    assert set(colseq) == color_set, "path must use each color exactly once"
    return tv, meta


def sample_bipartite_path(family, colors, side_a, side_b, a, b, seed=0,
                          eps=0.005, retries=10):
    """Rainbow a-b Hamilton path across a near-complete bipartition.

    side_a and side_b must be disjoint vertex sets of equal size t, with a
    in side_a and b in side_b, and colors must list exactly 2t-1 distinct
    color indices. Each color needs (1-eps)t^2 crossing edges and every
    vertex (1-eps)t(2t-1) crossing edges summed over the colors; edges
    inside a side are ignored throughout. Below t = 33 the exact solver
    takes over. At and above it the staged sampler runs: a long walk P1
    through edges shared by almost all colors, a short path P2 that spends
    every thin color, a sparsified rotation path P3 over the rest, and a
    perfect matching between the leftover colors and the edges of P1 and
    P3 read off alternate edges of a Hamilton path of the color-edge
    incidence graph (Hopcroft-Karp is the fallback, flagged in meta).

    Returns (Transversal("path", ...), meta). Bad inputs and unmet density
    floors raise ValueError, exhausted retries RuntimeError.
    """
    sa, sb = sorted(side_a), sorted(side_b)
    t = len(sa)
    if t == 0 or len(sb) != t:
        raise ValueError("sides must be nonempty and of equal size")
    if set(sa) & set(sb):
        raise ValueError("sides must be disjoint")
    n = family.n
    if sa[0] < 0 or max(sa[-1], sb[-1]) >= n:
        raise ValueError("side vertices out of range")
    cs = list(colors)
    if len(set(cs)) != len(cs):
        raise ValueError("colors must be distinct")
    if len(cs) != 2 * t - 1:
        raise ValueError(f"need 2t-1 = {2 * t - 1} colors, got {len(cs)}")
    if any(not 0 <= c < family.m for c in cs):
        raise ValueError("color index out of range")
    if a not in set(sa) or b not in set(sb):
        raise ValueError("a must lie in side_a and b in side_b")
    relaxed = eps > 0.01

    amask, bmask = _mask_of(sa), _mask_of(sb)
    masks = family.masks
    viol = []
    vsum = {v: 0 for v in sa + sb}
    for c in cs:
        g = masks[c]
        e = 0
        for u in sa:
            d = (g[u] & bmask).bit_count()
            e += d
            vsum[u] += d
        for v in sb:
            vsum[v] += (g[v] & amask).bit_count()
        if e < (1 - eps) * t * t:
            viol.append(f"color {c} has {e} crossing edges, needs "
                        f"{(1 - eps) * t * t:.1f}")
    need_v = (1 - eps) * t * (2 * t - 1)
    for v in sa + sb:
        if vsum[v] < need_v:
            viol.append(f"vertex {v} has {vsum[v]} colored crossing edges, "
                        f"needs {need_v:.1f}")
    if viol:
        raise ValueError("bipartite path preconditions: " +
                         "; ".join(viol[:8]))

    vert_set, color_set = set(sa) | set(sb), set(cs)

    if t <= T_EXACT_CAP:
        verts = sa + sb
        pos = {v: i for i, v in enumerate(verts)}
        sub_masks = []
        for c in cs:
            rows = [0] * (2 * t)
            for u in sa:
                for w in _bits(masks[c][u] & bmask):
                    rows[pos[u]] |= 1 << pos[w]
                    rows[pos[w]] |= 1 << pos[u]
            sub_masks.append(tuple(rows))
        res = find_transversal_path(
            ColoredFamily(2 * t, sub_masks), pos[a], pos[b])
        if res.status != "found":
            raise RuntimeError(f"exact bipartite path search: {res.status}")
        order = [verts[i] for i in res.transversal.order]
        colseq = [cs[c] for c in res.transversal.colors]
        return _finish_path(family, order, colseq, vert_set, color_set,
                            {"mode": "exact", "t": t, "attempts": 1,
                             "relaxed_eps": relaxed})

    # shared-edge graph G: crossing pairs present in almost every color
    bits = _family_bits(family)
    counts = bits[cs].sum(axis=0, dtype=np.int32)
    ia, ib = np.array(sa), np.array(sb)
    cross = np.zeros((n, n), dtype=bool)
    cross[np.ix_(ia, ib)] = True
    cross[np.ix_(ib, ia)] = True
    g_thr = min(math.ceil(1.99 * t), 2 * t - 2)
    g_adj = (counts >= g_thr) & cross
    g_rows = [int.from_bytes(
        np.packbits(g_adj[v], bitorder="little").tobytes(), "little")
        for v in range(n)]
    for v in sa + sb:
        d = (g_rows[v] & (bmask if v in set(sa) else amask)).bit_count()
        if d < 0.9 * t:
            raise ValueError(
                f"shared-edge graph too thin at vertex {v}: degree {d} "
                f"of {t} (inputs are not close enough to complete)")

    l1 = round(1.7 * t)
    k1 = round(1.95 * t)
    k = 2 * t - 1 - k1
    assert 2 * t - l1 >= k + 3, "walk budget leaves no room for the anchors"
    allmask = amask | bmask

    def opp(v):
        return bmask if (amask >> v) & 1 else amask

    def attempt(idx):
        rng = rng_for(seed, "bip-path", idx)
        # P1: a long walk through the shared-edge graph, avoiding b
        cur, visited, p1 = a, 1 << a, [a]
        not_b = ~(1 << b)
        while len(p1) < l1:
            cand = g_rows[cur] & ~visited & not_b
            if not cand:
                raise _Stuck("p1-walk")
            cur = _pick_bit(rng, cand)
            visited |= 1 << cur
            p1.append(cur)
        v = cur
        p1_edges = list(zip(p1, p1[1:]))
        # C1: colors that already saturate P1
        thr = 1.6 * t
        sat = []
        for c in cs:
            g = masks[c]
            cnt = 0
            for x, y in p1_edges:
                cnt += (g[x] >> y) & 1
            if cnt >= thr:
                sat.append(c)
        if len(sat) < k1:
            raise _Stuck("c1-thin")
        c1_set = set(rng.sample(sat, k1))
        c0_pool = [c for c in sorted(c1_set)
                   if (masks[c][v] & opp(v)).bit_count() >= 0.9 * t]
        if not c0_pool:
            raise _Stuck("c0-pool")
        c0 = rng.choice(c0_pool)
        thin = [c for c in cs if c not in c1_set]
        rng.shuffle(thin)
        c_kp1, c_kp2 = rng.sample(sorted(c1_set - {c0}), 2)
        seq = [c0] + thin + [c_kp1]
        feed = seq[1:] + [c_kp2]
        # P2: one edge per color in seq, each step keeping the next color
        # usable from the new endpoint within the fixed pool V
        vmask0 = (1 << v) | (allmask & ~visited & not_b)
        look_need = 0.4 * vmask0.bit_count()
        remaining = vmask0 & ~(1 << v)
        p2, cur = [v], v
        for ci, cnext in zip(seq, feed):
            cand = masks[ci][cur] & opp(cur) & remaining
            good = [w for w in _bits(cand)
                    if (masks[cnext][w] & opp(w) & vmask0).bit_count()
                    >= look_need]
            if not good:
                raise _Stuck("p2-walk")
            w = rng.choice(good)
            remaining &= ~(1 << w)
            p2.append(w)
            cur = w
        placed = list(seq)
        if not (amask >> cur) & 1:
            # landed in side_b: drop the last anchor edge, freeing its color
            remaining |= 1 << p2.pop()
            placed.pop()
            c1_left = c1_set - {c0}
        else:
            c1_left = c1_set - {c0, c_kp1}
        w = p2[-1]
        assert (amask >> w) & 1, "P2 must end in side_a"
        # P3: rotation path over everything not yet used, from w to b
        vprime = (allmask & ~visited) & ~_mask_of(p2[1:-1])
        if (vprime & amask).bit_count() != (vprime & bmask).bit_count():
            raise _Stuck("p3-unbalanced")
        vp = sorted(_bits(vprime))
        lpos = {x: i for i, x in enumerate(vp)}
        sub = []
        for x in vp:
            acc = 0
            row = g_rows[x]
            for j, y in enumerate(vp):
                acc |= ((row >> y) & 1) << j
            sub.append(acc)
        try:
            p3_loc, p3_meta = spread_ham_path(
                sub, lpos[w], lpos[b],
                seed=derive_seed(seed, "p3", idx), retries=4)
        except (ValueError, RuntimeError) as ex:
            raise _Stuck("p3-path", str(ex))
        p3 = [vp[i] for i in p3_loc]
        # H: colors against free edges; alternate edges of a Hamilton path
        # of H form a perfect matching when one exists
        hedges = p1_edges + list(zip(p3, p3[1:]))
        hc = sorted(c1_left)
        s_h = len(hc)
        assert len(hedges) == s_h, \
            f"color ledger broke: {len(hedges)} edges vs {s_h} colors"
        hrows = [0] * (2 * s_h)
        for i, c in enumerate(hc):
            g = masks[c]
            for j, (x, y) in enumerate(hedges):
                if (g[x] >> y) & 1:
                    hrows[i] |= 1 << (s_h + j)
                    hrows[s_h + j] |= 1 << i
        h_mode = "hamilton-alternate"
        try:
            horder, _ = spread_ham_path(
                hrows, None, None,
                seed=derive_seed(seed, "aux-h", idx), retries=3)
            pairing = {}
            for j in range(0, 2 * s_h, 2):
                x, y = horder[j], horder[j + 1]
                ci, ei = (x, y - s_h) if x < s_h else (y, x - s_h)
                pairing[hedges[ei]] = hc[ci]
        except (ValueError, RuntimeError):
            h_mode = "hopcroft-karp"
            adj = [list(_bits(hrows[i] >> s_h)) for i in range(s_h)]
            size, pairs = max_bipartite_matching(s_h, s_h, adj)
            if size < s_h:
                raise _Stuck("h-matching")
            pairing = {hedges[j]: hc[i] for i, j in pairs}
        ecol = {_norm(x, y): c for (x, y), c in pairing.items()}
        for (x, y), c in zip(zip(p2, p2[1:]), placed):
            ecol[_norm(x, y)] = c
        order = p1 + p2[1:] + p3[1:]
        colseq = [ecol[_norm(x, y)] for x, y in zip(order, order[1:])]
        extra = {"h_matching": h_mode, "p3_attempts": p3_meta["attempts"]}
        return order, colseq, extra

    tallies = {}
    for idx in range(retries):
        try:
            order, colseq, extra = attempt(idx)
        except _Stuck as ex:
            _tally(tallies, ex.stage)
            continue
        meta = {"mode": "staged", "t": t, "attempts": idx + 1,
                "tallies": tallies, "relaxed_eps": relaxed, **extra}
        return _finish_path(family, order, colseq, vert_set, color_set, meta)
    raise RuntimeError(
        f"bipartite path sampler exhausted {retries} attempts: {tallies}")


# ---------------------------------------------------------------------------
# cleanup frames


@dataclass
class BipartiteFrame:
    """A short rainbow path whose removal leaves a clean bipartite core.

    path runs from side_a to side_b; coloring maps each path edge (as a
    normalized pair) to its color. side_a and side_b list the remaining
    core including the two path endpoints, and colors lists the residual
    color indices, |side_a| + |side_b| - 1 of them.
    """

    path: tuple
    coloring: dict
    side_a: tuple
    side_b: tuple
    colors: tuple
    meta: dict = field(default_factory=dict)


@dataclass
class CliqueFrame:
    """Two rainbow pieces whose removal leaves two clean clique cores.

    path runs from side_a to side_b; edge is a single extra crossing edge
    (a-side vertex first) colored edge_color, vertex-disjoint from path.
    Sides list the remaining cores including all four piece endpoints and
    have even size; colors lists the |side_a| + |side_b| - 2 residual
    color indices.
    """

    path: tuple
    edge: tuple
    edge_color: int
    coloring: dict
    side_a: tuple
    side_b: tuple
    colors: tuple
    meta: dict = field(default_factory=dict)


def _near_bipartite_colors(family, half_mask, eps):
    """Colors with at most eps*n^2 edges inside the two given sides."""
    n = family.n
    full = (1 << n) - 1
    comp = full & ~half_mask
    lim = eps * n * n
    out = []
    for c in range(family.m):
        g = family.masks[c]
        twice = sum((g[v] & half_mask).bit_count() for v in _bits(half_mask))
        twice += sum((g[v] & comp).bit_count() for v in _bits(comp))
        if twice // 2 <= lim:
            out.append(c)
    return out


def _check_frame_common(family, sides, path_verts, coloring, residual, out):
    n, m = family.n, family.m
    seen = set()
    for v in path_verts:
        if v in seen:
            out.append(f"path repeats vertex {v}")
        seen.add(v)
    interior = set(path_verts[1:-1])
    for name, side in sides:
        if interior & set(side):
            out.append(f"path interior overlaps {name}")
    covered = set(sides[0][1]) | set(sides[1][1]) | set(path_verts)
    if covered != set(range(n)):
        out.append(f"frame covers {len(covered)} of {n} vertices")
    used = list(coloring.values())
    if len(set(used)) != len(used):
        out.append("path repeats a color")
    if set(used) & set(residual):
        out.append("a path color is also listed as residual")
    if set(used) | set(residual) != set(range(m)):
        out.append("path and residual colors do not partition the palette")
    for (u, v), c in coloring.items():
        if not 0 <= c < m or not family.has_edge(c, u, v):
            out.append(f"path edge {u}-{v} missing from color {c}")
    for x, y in zip(path_verts, path_verts[1:]):
        if _norm(x, y) not in coloring:
            out.append(f"path edge {x}-{y} has no color")
            break


def validate_bipartite_frame(family, frame):
    """Violations of the bipartite-frame contract (empty list = valid).

    Checks the structural partition, the path coloring, equal side sizes,
    0.995 crossing density for every residual color, 0.995 color-summed
    crossing degree at every core vertex, and n/10 size floors.
    """
    out = []
    n = family.n
    A, B = list(frame.side_a), list(frame.side_b)
    sa, sb = set(A), set(B)
    p = list(frame.path)
    if not p or not A or not B:
        return ["empty frame"]
    if sa & sb:
        out.append("sides overlap")
    if len(A) != len(B):
        out.append(f"sides differ in size: {len(A)} vs {len(B)}")
    if p[0] not in sa or p[-1] not in sb:
        out.append("path endpoints must sit in side_a and side_b")
    _check_frame_common(family, [("side_a", A), ("side_b", B)], p,
                        frame.coloring, frame.colors, out)
    if len(frame.colors) != len(A) + len(B) - 1:
        out.append(f"{len(frame.colors)} residual colors for "
                   f"{len(A) + len(B)} core vertices")
    if len(A) < n / 10 or len(frame.colors) < n / 10:
        out.append("core too small for the frame contract")
    if out:
        return out
    am, bm = _mask_of(A), _mask_of(B)
    floor_e = 0.995 * len(A) * len(B)
    deg = {v: 0 for v in A + B}
    for c in frame.colors:
        g = family.masks[c]
        e = 0
        for u in A:
            d = (g[u] & bm).bit_count()
            e += d
            deg[u] += d
        for v in B:
            deg[v] += (g[v] & am).bit_count()
        if e < floor_e:
            out.append(f"residual color {c} has {e} crossing edges, "
                       f"needs {floor_e:.0f}")
    floor_d = 0.995 * len(A) * len(frame.colors)
    for v in A + B:
        if deg[v] < floor_d:
            out.append(f"core vertex {v} has {deg[v]} colored crossing "
                       f"edges, needs {floor_d:.0f}")
    return out


def validate_clique_frame(family, frame):
    """Violations of the two-cliques frame contract (empty list = valid).

    Checks the structural partition (path plus the extra crossing edge),
    even side sizes, 0.999 inside density on both cores for every residual
    color, and n/10 size floors.
    """
    out = []
    n = family.n
    A, B = list(frame.side_a), list(frame.side_b)
    sa, sb = set(A), set(B)
    p = list(frame.path)
    if not p or not A or not B:
        return ["empty frame"]
    if sa & sb:
        out.append("sides overlap")
    if p[0] not in sa or p[-1] not in sb:
        out.append("path endpoints must sit in side_a and side_b")
    ea, eb = frame.edge
    if ea not in sa or eb not in sb:
        out.append("edge endpoints must sit in side_a and side_b")
    if ea in p or eb in p:
        out.append("edge endpoints overlap the path")
    if not family.has_edge(frame.edge_color, ea, eb):
        out.append(f"edge {ea}-{eb} missing from color {frame.edge_color}")
    coloring = dict(frame.coloring)
    coloring[_norm(ea, eb)] = frame.edge_color
    _check_frame_common(family, [("side_a", A), ("side_b", B)], p,
                        coloring, frame.colors, out)
    if len(frame.colors) != len(A) + len(B) - 2:
        out.append(f"{len(frame.colors)} residual colors for "
                   f"{len(A) + len(B)} core vertices")
    if len(A) % 2 or len(B) % 2:
        out.append(f"side sizes must be even, got {len(A)} and {len(B)}")
    if min(len(A), len(B)) < n / 10 or len(frame.colors) < n / 10:
        out.append("core too small for the frame contract")
    if out:
        return out
    for name, side in (("side_a", A), ("side_b", B)):
        sm = _mask_of(side)
        floor_e = 0.999 * len(side) * (len(side) - 1) / 2
        for c in frame.colors:
            g = family.masks[c]
            e = sum((g[u] & sm).bit_count() for u in side) // 2
            if e < floor_e:
                out.append(f"residual color {c} has {e} edges inside "
                           f"{name}, needs {floor_e:.0f}")
    return out


# ---------------------------------------------------------------------------
# piece joining shared by the cleanups and the exceptional prefix


def _free_color_options(family, free_colors, u, w):
    return [c for c in free_colors if family.has_edge(c, u, w)]


def _connect_pieces(family, rng, pieces, free_colors, used_mask, amask,
                    bmask, mode, coloring, forbid=0, keep_first=False,
                    cross_ends=True, tries=200):
    """Chain vertex-disjoint path pieces into one long path.

    Pieces are visited in random order and orientation (the first piece is
    pinned when keep_first is set). Facing endpoints on the same side are
    joined through one fresh middle vertex (2 edges), opposite sides
    through two (3 edges); mode "crossing" draws every connector edge
    across the amask/bmask bipartition, mode "inside" keeps connector
    edges within the sides except for the single middle edge of a 3-edge
    connector. Every connector edge spends one color from free_colors
    (mutated), middles avoid used_mask and forbid. With cross_ends, a
    final crossing edge is appended when the chain's two endpoints sit on
    the same side. Returns (order, used_mask); raises _Stuck when no
    connector fits.
    """
    def side_of(v):
        return amask if (amask >> v) & 1 else bmask

    def take_edge(u, w):
        opts = _free_color_options(family, sorted(free_colors), u, w)
        if not opts:
            return False
        c = rng.choice(opts)
        free_colors.discard(c)
        coloring[_norm(u, w)] = c
        return True

    def fresh(side_mask):
        cand = side_mask & ~used_mask & ~forbid
        if not cand:
            raise _Stuck("connector", "no fresh middle vertex")
        return cand

    order = list(pieces)
    if keep_first:
        rest = order[1:]
        rng.shuffle(rest)
        order = order[:1] + rest
        flips = [False] + [rng.random() < 0.5 for _ in rest]
    else:
        rng.shuffle(order)
        flips = [rng.random() < 0.5 for _ in order]
    chain = list(order[0][::-1] if flips[0] else order[0])
    for piece, flip in zip(order[1:], flips[1:]):
        nxt = list(piece[::-1] if flip else piece)
        x, y = chain[-1], nxt[0]
        same = side_of(x) == side_of(y)
        if mode == "crossing":
            mid_sides = ([amask if side_of(x) == bmask else bmask]
                         if same else
                         [amask if side_of(x) == bmask else bmask,
                          side_of(x)])
        else:
            mid_sides = ([side_of(x)] if same
                         else [side_of(x), side_of(y)])
        placed = None
        for _ in range(tries):
            mids = []
            ok = True
            for sm in mid_sides:
                cand = fresh(sm) & ~_mask_of(mids)
                if not cand:
                    ok = False
                    break
                mids.append(_pick_bit(rng, cand))
            if not ok:
                continue
            hops = [x] + mids + [y]
            spent = []
            for u, w in zip(hops, hops[1:]):
                if take_edge(u, w):
                    spent.append(_norm(u, w))
                else:
                    for e in spent:
                        free_colors.add(coloring.pop(e))
                    spent = None
                    break
            if spent is not None:
                placed = mids
                break
        if placed is None:
            raise _Stuck("connector", f"cannot join {x} to {y}")
        for v in placed:
            used_mask |= 1 << v
        chain.extend(placed)
        chain.extend(nxt)
    if cross_ends and len(chain) >= 1:
        if side_of(chain[0]) == side_of(chain[-1]):
            w = chain[-1]
            target = amask if side_of(w) == bmask else bmask
            placed = False
            for _ in range(tries):
                cand = fresh(target)
                z = _pick_bit(rng, cand)
                if take_edge(w, z):
                    used_mask |= 1 << z
                    chain.append(z)
                    placed = True
                    break
            if not placed:
                raise _Stuck("connector", "cannot split the chain ends")
    return chain, used_mask


# ---------------------------------------------------------------------------
# cleanup, bipartite case


def _relocate(family, colors, a0, n, toward_own):
    """2/3-majority relocation sweep; returns the settled side indicator.

    toward_own True moves a vertex whose color-summed degree concentrates
    on its own side (bipartite-like colors), False moves one concentrating
    on the opposite side (clique-like colors). Ties relocate.
    """
    side = [False] * n
    for v in a0:
        side[v] = True
    csel = list(colors)
    moves = 0
    while True:
        am = _mask_of([v for v in range(n) if side[v]])
        bm = _mask_of([v for v in range(n) if not side[v]])
        moved = False
        for v in range(n):
            own = opp_ = 0
            sm = am if side[v] else bm
            om = bm if side[v] else am
            for c in csel:
                g = family.masks[c][v]
                own += (g & sm).bit_count()
                opp_ += (g & om).bit_count()
            stat = own if toward_own else opp_
            if 3 * stat >= 2 * (own + opp_) and own + opp_ > 0:
                side[v] = not side[v]
                moves += 1
                moved = True
                break
        if not moved:
            return side, moves
        if moves > 2 * n:
            raise ValueError(
                "relocation did not stabilise; the certificate bipartition "
                "is too far from the family's structure")


def cleanup_bipartite(family, seed=0, eps=0.005, alpha=0.05, tau=0.1,
                      half_set=None, checks=True, retries=20):
    """Reduce a near-bipartite extremal family to a BipartiteFrame.

    Vertices are first relocated across the certificate bipartition by a
    2/3 majority rule and a coarse rebalancing. One short path P then
    swallows everything irregular: a parity edge when the bipartite color
    count is odd, a matching that levels the two sides, one inside edge
    for every color that cannot cross, repairs for low-crossing-degree
    vertices, and a few spare singletons; the frame contract is validated
    before returning. Structural preconditions (alpha-extremal, not
    exceptional, most colors near-bipartite) raise ValueError; attempts
    that run out of luck retry up to `retries` times.
    """
    n, m = family.n, family.m
    if m != n:
        raise ValueError(f"need one color per vertex, got m={m} n={n}")
    if half_set is None or checks:
        rep = is_family_extremal(family, alpha,
                                 seed=derive_seed(seed, "extremality"))
        if not rep["extremal"]:
            raise ValueError(
                "family is not alpha-extremal; use the non-extremal "
                "pipeline instead")
        if half_set is None:
            half_set = rep["half_set"]
    if checks:
        exc = is_exceptional(family, tau=tau,
                             seed=derive_seed(seed, "exceptional"))
        if exc["exceptional"]:
            raise ValueError(
                "family is exceptional; use sample_exceptional_path")
    half_mask = _mask_of(half_set)
    cbip = _near_bipartite_colors(family, half_mask, eps)
    if len(cbip) < (1 - 100 * eps) * n:
        raise ValueError(
            f"only {len(cbip)} of {n} colors are near-bipartite; "
            "use cleanup_cliques")

    side, moves = _relocate(family, cbip, sorted(half_set), n,
                            toward_own=True)
    # coarse rebalance: move vertices that still have inside mass
    rng0 = rng_for(seed, "cleanup-bip-balance")
    while True:
        na = sum(side)
        if abs(2 * na - n) <= 1:
            break
        big = na > n - na
        bm_ = _mask_of([v for v in range(n) if side[v] == big])
        cand = []
        for v in range(n):
            if side[v] != big:
                continue
            own = sum((family.masks[c][v] & bm_).bit_count() for c in cbip)
            if own >= 0.0001 * n * n:
                cand.append(v)
        if not cand:
            break
        side[rng0.choice(cand)] = not big
    if 2 * sum(side) < n:
        side = [not s for s in side]

    averts = [v for v in range(n) if side[v]]
    bverts = [v for v in range(n) if not side[v]]
    cset = set(cbip)
    off = [c for c in range(m) if c not in cset]

    def inside_edges(c, side_mask, avoid):
        g = family.masks[c]
        out = []
        for u in _bits(side_mask & ~avoid):
            for w in _bits(g[u] & side_mask & ~avoid):
                if w > u:
                    out.append((u, w))
        return out

    tallies = {}
    for att in range(retries):
        rng = rng_for(seed, "cleanup-bip", att)
        try:
            am, bm = _mask_of(averts), _mask_of(bverts)
            d = len(averts) - len(bverts)
            used, used_c, coloring = 0, set(), {}
            pieces = []
            at_v = {}

            def add_piece(vs, edges_cols):
                nonlocal used
                idx = len(pieces)
                pieces.append(list(vs))
                for v in vs:
                    at_v[v] = idx
                    used |= 1 << v
                for (x, y), c in edges_cols:
                    coloring[_norm(x, y)] = c
                    used_c.add(c)

            # E0: one parity edge when the bipartite color count is odd
            if len(cset) % 2:
                pools = []
                for c in sorted(cset):
                    ea = inside_edges(c, am, used)
                    if d > 0:
                        if ea:
                            pools.append((c, "a", ea))
                    else:
                        eb = inside_edges(c, bm, used)
                        if ea:
                            pools.append((c, "a", ea))
                        if eb:
                            pools.append((c, "b", eb))
                if d == 0:
                    for c in off:
                        ec = [(u, w) for u in _bits(am & ~used)
                              for w in _bits(family.masks[c][u] & bm & ~used)]
                        if ec:
                            pools.append((c, "x", ec))
                if not pools:
                    raise _Stuck("parity-edge")
                weights = [len(p[2]) for p in pools]
                c0, where, pool = rng.choices(pools, weights=weights)[0]
                e0 = pool[rng.randrange(len(pool))]
                if where == "b":
                    # keep the parity edge inside the side named A
                    averts, bverts = bverts, averts
                    am, bm = bm, am
                    d = 0
                add_piece(list(e0), [(e0, c0)])

            # E1: level the sides with a rainbow matching inside A
            for _ in range(d):
                done = False
                for c in rng.sample(sorted(cset - used_c),
                                    len(cset - used_c)):
                    pool = inside_edges(c, am, used)
                    if pool:
                        e = pool[rng.randrange(len(pool))]
                        add_piece(list(e), [(e, c)])
                        done = True
                        break
                if not done:
                    raise _Stuck("level-matching")

            # E2: one inside edge per color that cannot cross, alternating
            # sides starting with B to keep the final bipartition equitable
            ka = kb = 0
            for c in rng.sample([c for c in off if c not in used_c],
                                len([c for c in off if c not in used_c])):
                side_mask = am if kb > ka else bm
                pool = inside_edges(c, side_mask, used)
                if not pool:
                    raise _Stuck("offcolor-edge",
                                 f"color {c} has no free inside edge")
                e = pool[rng.randrange(len(pool))]
                add_piece(list(e), [(e, c)])
                if side_mask == am:
                    ka += 1
                else:
                    kb += 1

            # E3: pull low-crossing-degree vertices onto the path
            lim = 0.24999 * n * n
            bad = []
            for v in averts:
                s = sum((family.masks[c][v] & bm).bit_count() for c in cbip)
                if s <= lim:
                    bad.append(v)
            for v in bverts:
                s = sum((family.masks[c][v] & am).bit_count() for c in cbip)
                if s <= lim:
                    bad.append(v)
            for v in bad:
                om = bm if (am >> v) & 1 else am
                need = 2
                if v in at_v:
                    piece = pieces[at_v[v]]
                    if v not in (piece[0], piece[-1]):
                        continue
                    need = 1
                for _ in range(need):
                    piece = pieces[at_v[v]] if v in at_v else None
                    cand = om & ~used & ~_mask_of(bad)
                    got = False
                    for _ in range(100):
                        if not cand:
                            break
                        z = _pick_bit(rng, cand)
                        opts = _free_color_options(
                            family, sorted(cset - used_c), v, z)
                        if not opts:
                            cand &= ~(1 << z)
                            continue
                        c = rng.choice(opts)
                        if piece is None:
                            add_piece([v, z], [((v, z), c)])
                        else:
                            coloring[_norm(v, z)] = c
                            used_c.add(c)
                            used |= 1 << z
                            if piece[0] == v:
                                piece.insert(0, z)
                            else:
                                piece.append(z)
                            at_v[z] = at_v[v]
                        got = True
                        break
                    if not got:
                        raise _Stuck("degree-repair")

            # spare singletons give the joiner room to spread
            spare = math.ceil(eps * n)
            freeverts = [v for v in range(n) if not (used >> v) & 1]
            if len(freeverts) < spare + 4:
                raise _Stuck("no-room")
            for v in rng.sample(freeverts, spare):
                add_piece([v], [])

            free_cols = set(cset) - used_c
            order, used = _connect_pieces(
                family, rng, pieces, free_cols, used, am, bm,
                "crossing", coloring)
            if (am >> order[0]) & 1 == 0:
                order.reverse()
            interior = set(order[1:-1])
            side_a = tuple(v for v in averts if v not in interior)
            side_b = tuple(v for v in bverts if v not in interior)
            residual = tuple(sorted(set(range(m)) - set(coloring.values())))
            frame = BipartiteFrame(
                tuple(order), coloring, side_a, side_b, residual,
                {"attempts": att + 1, "moves": moves, "d": d,
                 "e0": len(cset) % 2, "path_len": len(order),
                 "tallies": dict(tallies)})
            bad_f = validate_bipartite_frame(family, frame)
            if bad_f:
                raise _Stuck("frame", bad_f[0])
            return frame
        except _Stuck as ex:
            _tally(tallies, ex.stage)
            continue
    raise RuntimeError(
        f"bipartite cleanup exhausted {retries} attempts: {tallies}")


# ---------------------------------------------------------------------------
# cleanup, two-cliques case


def cleanup_cliques(family, seed=0, eps=0.005, alpha=0.05, tau=0.1,
                    half_set=None, checks=True, retries=30):
    """Reduce a two-cliques extremal family to a CliqueFrame.

    The certificate bipartition is settled by a 2/3 majority rule on the
    clique-like colors. One path swallows the irregular part: short
    rainbow covers for low-inside-degree vertices on each side, a parity
    edge when the non-clique color count is even, one crossing edge per
    color that lives across the cut, a rainbow path (or matching) for the
    near-bipartite colors, and spare singletons. A separate single
    crossing edge is kept aside; the assembly of the final cycle needs
    both. Even side sizes are required by the frame contract, so attempts
    whose sides come out odd retry. Structural preconditions raise
    ValueError, including odd n, for which no family in this regime has
    a transversal cycle.
    """
    n, m = family.n, family.m
    if m != n:
        raise ValueError(f"need one color per vertex, got m={m} n={n}")
    if n % 2:
        raise ValueError("two-cliques cleanup needs even n")
    if half_set is None or checks:
        rep = is_family_extremal(family, alpha,
                                 seed=derive_seed(seed, "extremality"))
        if not rep["extremal"]:
            raise ValueError(
                "family is not alpha-extremal; use the non-extremal "
                "pipeline instead")
        if half_set is None:
            half_set = rep["half_set"]
    if checks:
        exc = is_exceptional(family, tau=tau,
                             seed=derive_seed(seed, "exceptional"))
        if exc["exceptional"]:
            raise ValueError(
                "family is exceptional; use sample_exceptional_path")
    half_mask = _mask_of(half_set)
    c1 = _near_bipartite_colors(family, half_mask, eps)
    if len(c1) >= (1 - 100 * eps) * n:
        raise ValueError(
            f"{len(c1)} of {n} colors are near-bipartite; "
            "use cleanup_bipartite")
    comp = ((1 << n) - 1) & ~half_mask
    c2 = []
    for c in range(m):
        if c in set(c1):
            continue
        g = family.masks[c]
        crossing = sum((g[v] & comp).bit_count() for v in _bits(half_mask))
        if crossing >= 0.1 * n * n:
            c2.append(c)
    c3 = sorted(set(range(m)) - set(c1) - set(c2))
    if len(c3) < (100 * eps - eps * eps) * n:
        raise ValueError(
            f"only {len(c3)} clique-like colors; the two-cliques cleanup "
            "needs most colors concentrated inside the sides")

    side, moves = _relocate(family, c3, sorted(half_set), n,
                            toward_own=False)
    averts = [v for v in range(n) if side[v]]
    bverts = [v for v in range(n) if not side[v]]
    am, bm = _mask_of(averts), _mask_of(bverts)

    tallies = {}
    for att in range(retries):
        rng = rng_for(seed, "cleanup-cliq", att)
        try:
            used, used_c, coloring = 0, set(), {}
            pieces = []
            free3 = set(c3)

            def grab_inside(cpool, u_mask, avoid):
                for c in rng.sample(sorted(cpool), len(cpool)):
                    g = family.masks[c]
                    cand_u = [u for u in _bits(u_mask & ~avoid)
                              if g[u] & u_mask & ~avoid & ~(1 << u)]
                    if not cand_u:
                        continue
                    u = rng.choice(cand_u)
                    w = _pick_bit(rng, g[u] & u_mask & ~avoid & ~(1 << u))
                    return c, (u, w)
                return None, None

            # low-inside-degree vertices get covered by short rainbow paths
            for sm, verts in ((am, averts), (bm, bverts)):
                k = len(verts)
                lim = (1 - eps) * len(c3) * (k - 1)
                badv = []
                for v in verts:
                    s = sum((family.masks[c][v] & sm).bit_count()
                            for c in c3)
                    if s <= lim:
                        badv.append(v)
                if len(badv) > math.ceil(5 * eps * n):
                    raise ValueError(
                        f"{len(badv)} low-degree vertices on one side; "
                        "the clique cores are not dense enough")
                if not badv:
                    continue
                rng.shuffle(badv)
                goodm = sm & ~used & ~_mask_of(badv)
                chain = []
                ok = True
                for x in badv:
                    for hop in range(2):
                        anchor = x if (hop == 1 or not chain) else chain[-1]
                        other = x if anchor != x else None
                        if other is None:
                            # fresh good partner after x
                            got = False
                            for _ in range(120):
                                if not goodm:
                                    break
                                z = _pick_bit(rng, goodm)
                                opts = _free_color_options(
                                    family, sorted(free3), x, z)
                                if opts:
                                    c = rng.choice(opts)
                                    chain.append(z)
                                    coloring[_norm(x, z)] = c
                                    used_c.add(c)
                                    free3.discard(c)
                                    goodm &= ~(1 << z)
                                    got = True
                                    break
                                goodm &= ~(1 << z)
                            if not got:
                                ok = False
                            break
                        opts = _free_color_options(
                            family, sorted(free3), anchor, x)
                        if not opts:
                            ok = False
                            break
                        c = rng.choice(opts)
                        coloring[_norm(anchor, x)] = c
                        used_c.add(c)
                        free3.discard(c)
                        chain.append(x)
                    if not ok:
                        break
                if not ok:
                    raise _Stuck("cover-path")
                if len(chain) == len(badv):
                    # started at a bad vertex: prepend a good anchor
                    got = False
                    for _ in range(120):
                        if not goodm:
                            break
                        z = _pick_bit(rng, goodm)
                        opts = _free_color_options(
                            family, sorted(free3), z, chain[0])
                        if opts:
                            c = rng.choice(opts)
                            coloring[_norm(z, chain[0])] = c
                            used_c.add(c)
                            free3.discard(c)
                            chain.insert(0, z)
                            got = True
                            break
                        goodm &= ~(1 << z)
                    if not got:
                        raise _Stuck("cover-path")
                pieces.append(chain)
                used |= _mask_of(chain)

            # the spare crossing edge kept out of the long path
            cx, ex = None, None
            for c in rng.sample(sorted(free3), len(free3)):
                g = family.masks[c]
                cand = [u for u in _bits(am & ~used) if g[u] & bm & ~used]
                if cand:
                    u = rng.choice(cand)
                    w = _pick_bit(rng, g[u] & bm & ~used)
                    cx, ex = c, (u, w)
                    break
            if ex is None:
                raise _Stuck("spare-edge")
            free3.discard(cx)
            used |= _mask_of(ex)

            # parity edge: keep the count of colors outside C3 odd overall
            if (len(c1) + len(c2)) % 2 == 0:
                got = False
                for c in rng.sample(sorted(free3), len(free3)):
                    g = family.masks[c]
                    cand = [u for u in _bits(am & ~used)
                            if g[u] & bm & ~used]
                    if cand:
                        u = rng.choice(cand)
                        w = _pick_bit(rng, g[u] & bm & ~used)
                        pieces.append([u, w])
                        coloring[_norm(u, w)] = c
                        used_c.add(c)
                        free3.discard(c)
                        used |= _mask_of((u, w))
                        got = True
                        break
                if not got:
                    raise _Stuck("parity-edge")

            # one crossing edge per color that lives across the cut
            for c in rng.sample(c2, len(c2)):
                g = family.masks[c]
                cand = [u for u in _bits(am & ~used) if g[u] & bm & ~used]
                if not cand:
                    raise _Stuck("crossing-color",
                                 f"color {c} has no free crossing edge")
                u = rng.choice(cand)
                w = _pick_bit(rng, g[u] & bm & ~used)
                pieces.append([u, w])
                coloring[_norm(u, w)] = c
                used_c.add(c)
                used |= _mask_of((u, w))

            # near-bipartite colors: a crossing rainbow path when there are
            # many, one crossing edge each when there are few
            if len(c1) > math.sqrt(eps) * n:
                start_m = am & ~used
                if not start_m:
                    raise _Stuck("bip-path")
                cur = _pick_bit(rng, start_m)
                chain = [cur]
                used |= 1 << cur
                for c in rng.sample(c1, len(c1)):
                    om = bm if (am >> cur) & 1 else am
                    cand = family.masks[c][cur] & om & ~used
                    if not cand:
                        raise _Stuck("bip-path",
                                     f"color {c} stuck at {cur}")
                    nxt = _pick_bit(rng, cand)
                    coloring[_norm(cur, nxt)] = c
                    used_c.add(c)
                    used |= 1 << nxt
                    chain.append(nxt)
                    cur = nxt
                pieces.append(chain)
            else:
                for c in rng.sample(c1, len(c1)):
                    g = family.masks[c]
                    cand = [u for u in _bits(am & ~used)
                            if g[u] & bm & ~used]
                    if not cand:
                        raise _Stuck("bip-edge",
                                     f"color {c} has no free crossing edge")
                    u = rng.choice(cand)
                    w = _pick_bit(rng, g[u] & bm & ~used)
                    pieces.append([u, w])
                    coloring[_norm(u, w)] = c
                    used_c.add(c)
                    used |= _mask_of((u, w))

            spare = math.ceil(eps * n)
            freeverts = [v for v in range(n) if not (used >> v) & 1
                         and v not in ex]
            if len(freeverts) < spare + 4:
                raise _Stuck("no-room")
            for v in rng.sample(freeverts, spare):
                pieces.append([v])
                used |= 1 << v

            order, used = _connect_pieces(
                family, rng, pieces, free3, used, am, bm,
                "inside", coloring)
            if (am >> order[0]) & 1 == 0:
                order.reverse()
            interior = set(order[1:-1])
            side_a = tuple(v for v in averts if v not in interior)
            side_b = tuple(v for v in bverts if v not in interior)
            if len(side_a) % 2 or len(side_b) % 2:
                raise _Stuck("side-parity")
            va, vb = ex if (am >> ex[0]) & 1 else (ex[1], ex[0])
            residual = sorted(set(range(m)) - set(coloring.values()) - {cx})
            frame = CliqueFrame(
                tuple(order), (va, vb), cx, coloring, side_a, side_b,
                tuple(residual),
                {"attempts": att + 1, "moves": moves,
                 "e0": 1 - (len(c1) + len(c2)) % 2,
                 "path_len": len(order), "c_splits": (len(c1), len(c2),
                                                      len(c3)),
                 "tallies": dict(tallies)})
            bad_f = validate_clique_frame(family, frame)
            if bad_f:
                raise _Stuck("frame", bad_f[0])
            return frame
        except _Stuck as ex_:
            _tally(tallies, ex_.stage)
            continue
    raise RuntimeError(
        f"two-cliques cleanup exhausted {retries} attempts: {tallies}")


# ---------------------------------------------------------------------------
# non-extremal pipeline


def _splice(path, virt, byends):
    out = [path[0]]
    for x, y in zip(path, path[1:]):
        if _norm(x, y) in virt:
            q = byends[frozenset((x, y))]
            seg = q if q[0] == x else q[::-1]
            out.extend(seg[1:])
        else:
            out.append(y)
    return out


def _assemble_from_vortex(family, sample, params, seed):
    """Cover down level by level, close the last block, recolor the absorber."""
    N = sample.N
    vb, cb = sample.v_blocks, sample.c_blocks
    cabs = set(sample.c_abs)
    coloring = {}
    prev = [list(e) for e in sample.m_abs]
    base = len(sample.m_abs) - len(sample.c_abs)
    cover_p = {k: params[k] for k in ("beta", "gamma", "eps", "cap_hi")}
    for lvl in range(1, N):
        mi = [(p[0], p[-1]) for p in prev]
        if lvl >= 2:
            expect = base + sum(len(cb[j]) - len(vb[j])
                                for j in range(lvl - 1))
            assert len(mi) == expect, \
                f"matching ledger broke at level {lvl}: {len(mi)} vs {expect}"
        cols = (sorted(set(cb[0]) - cabs) if lvl == 1
                else sorted(cb[lvl - 1]))
        p = dict(cover_p)
        p["relax_ratio"] = lvl == 1
        try:
            pc = cover_down(family, vb[lvl - 1], vb[lvl], mi, cols, p,
                            derive_seed(seed, "cover", lvl))
        except CoverDownError as ex:
            raise _Stuck(f"cover-level-{lvl}", str(ex))
        coloring.update(pc.coloring)
        byends = {frozenset((q[0], q[-1])): q for q in prev}
        virt = set(pc.matching)
        prev = [_splice(q, virt, byends) for q in pc.paths]

    mi = [(p[0], p[-1]) for p in prev]
    expect = base + sum(len(cb[j]) - len(vb[j]) for j in range(N - 1))
    assert len(mi) == expect, \
        f"matching ledger broke at the last level: {len(mi)} vs {expect}"
    verts = sorted(vb[N - 1])
    cn = sorted(cb[N - 1])
    rows = final_step_graph(family, cn, len(verts))
    pos = {v: j for j, v in enumerate(verts)}
    sub = []
    for v in verts:
        acc = 0
        row = rows[v]
        for j, w in enumerate(verts):
            acc |= ((row >> w) & 1) << j
        sub.append(acc)
    mloc = []
    for x, y in mi:
        assert x in pos and y in pos, \
            "virtual edge endpoints must live in the last block"
        lx, ly = pos[x], pos[y]
        mloc.append((lx, ly))
        sub[lx] |= 1 << ly
        sub[ly] |= 1 << lx
    res = robust_hamilton(len(verts), sub, matching=mloc,
                          seed=derive_seed(seed, "final-ham"), restarts=300)
    if not res.found:
        raise _Stuck("final-hamilton", res.obstruction or "")
    cyc = [verts[j] for j in res.order]

    rng = rng_for(seed, "final-colors")
    virt_set = {_norm(x, y) for x, y in mi}
    pairs = [p for p in zip(cyc, cyc[1:] + cyc[:1])
             if _norm(*p) not in virt_set]
    rng.shuffle(pairs)
    used = set()
    for x, y in pairs:
        opts = [c for c in cn if c not in used and family.has_edge(c, x, y)]
        if not opts:
            raise _Stuck("final-coloring")
        c = rng.choice(opts)
        used.add(c)
        coloring[_norm(x, y)] = c

    phi = construct_phi(family, sample, sorted(used))
    for e, c in phi.items():
        coloring[_norm(*e)] = c

    byends = {frozenset((q[0], q[-1])): q for q in prev}
    order = []
    for idx in range(len(cyc)):
        x, y = cyc[idx], cyc[(idx + 1) % len(cyc)]
        if _norm(x, y) in virt_set:
            q = byends[frozenset((x, y))]
            seg = q if q[0] == x else q[::-1]
        else:
            seg = [x, y]
        order.extend(seg[:-1])
    colseq = [coloring[_norm(order[j], order[(j + 1) % len(order)])]
              for j in range(len(order))]
    tv = Transversal("cycle", tuple(order), tuple(colseq))
    bad = validate_transversal(family, tv)
    assert not bad, f"pipeline produced an invalid transversal: {bad[:3]}"
    return tv, {"levels": N, "final_attempts": res.attempts,
                "final_block": len(verts)}


def sample_transversal_nonextremal(family, params=None, seed=0, retries=10,
                                   check_extremal=True):
    """Transversal Hamilton cycle through the vortex-absorber pipeline.

    Draws a vortex partition with an absorber in the first block, covers
    each block by paths ending one block down (threading the previous
    level's paths as virtual edges), closes the last block with a robust
    Hamilton cycle through its one virtual edge, and lets the absorber
    recoloring pay for the colors the final step did not use. Requires
    m == n, a non-extremal family (checked unless check_extremal is off,
    as when the dispatcher has already classified), and a feasible vortex
    plan for n under the preset (ValueError with the planner's report
    otherwise). Returns (Transversal, meta).
    """
    params = dict(DESK) if params is None else dict(params)
    n, m = family.n, family.m
    if m != n:
        raise ValueError(f"need one color per vertex, got m={m} n={n}")
    plan = plan_vortex_sizes(n, params["beta"], params["delta"], params["L"],
                             params.get("kappa", 1.02),
                             params.get("cap_hi", 0.25),
                             params.get("gamma", 0.35))
    if not plan["feasible"]:
        raise ValueError(
            f"vortex plan infeasible for n={n}: " +
            "; ".join(plan["reasons"]))
    if check_extremal:
        rep = is_family_extremal(family, params["alpha"],
                                 seed=derive_seed(seed, "extremality"))
        if rep["extremal"]:
            raise ValueError(
                "family is alpha-extremal; use the extremal route")
    tallies = {}
    for att in range(retries):
        try:
            sample = sample_vortex_absorber(
                family, params, derive_seed(seed, "vortex", att))
        except VortexSampleError as ex:
            _tally(tallies, "vortex-draw")
            tallies.setdefault("last_vortex_error", str(ex)[:120])
            continue
        try:
            tv, meta = _assemble_from_vortex(
                family, sample, params, derive_seed(seed, "assemble", att))
        except _Stuck as ex:
            _tally(tallies, ex.stage)
            continue
        meta.update(route="nonextremal", attempt=att + 1,
                    tallies=tallies, plan={k: plan[k] for k in
                                           ("N", "v_sizes", "c_sizes")})
        return tv, meta
    raise RuntimeError(
        f"non-extremal sampler exhausted {retries} attempts: {tallies}")


# ---------------------------------------------------------------------------
# exceptional route


def sample_exceptional_path(family, witness, seed=0, eps=0.005, tau=0.1,
                            cert=None, retries=12):
    """Rainbow Hamilton path joining the ends of an exceptional witness.

    witness = ((u, v), i): an edge of color i that crosses the optimal
    parity certificate (A, C) the wrong way, inside a side for i in C and
    across for i outside C. The returned path runs from u to v, uses every
    color except i exactly once, and respects the certificate (colors in C
    appear only on crossing edges, others only inside a side), so closing
    it with the witness edge yields a transversal cycle. cert overrides
    the certificate as (half_set, colors); without it compute_r runs and
    the family must satisfy r <= tau*n^2. Invalid witnesses raise
    ValueError; a zero invariant raises NoTransversalError.
    """
    n, m = family.n, family.m
    try:
        (u0, v0), i = witness
        u0, v0, i = int(u0), int(v0), int(i)
    except (TypeError, ValueError):
        raise ValueError("witness must be ((u, v), color)")
    if not (0 <= u0 < n and 0 <= v0 < n and u0 != v0):
        raise ValueError("witness vertices out of range")
    if not 0 <= i < m:
        raise ValueError("witness color out of range")
    if not family.has_edge(i, u0, v0):
        raise ValueError(f"witness edge {u0}-{v0} missing from color {i}")
    if cert is None:
        rep = compute_r(family, seed=derive_seed(seed, "cert"),
                        stop_below=tau * n * n)
        if rep["r"] == 0:
            raise NoTransversalError(
                "no transversal exists: the parity invariant is zero",
                half_set=rep["half_set"], colors=rep["colors"])
        if rep["r"] > tau * n * n:
            raise ValueError(
                f"family is not exceptional: r={rep['r']} exceeds "
                f"tau*n^2={tau * n * n:.0f}")
        cert = (rep["half_set"], rep["colors"])
    aset, cset = set(cert[0]), set(cert[1])
    amask = _mask_of(aset)
    full = (1 << n) - 1
    bmask = full & ~amask
    crossing = ((amask >> u0) & 1) != ((amask >> v0) & 1)
    if i in cset and crossing:
        raise ValueError(
            "witness pair is not eligible: a certificate color needs an "
            "edge inside one side")
    if i not in cset and not crossing:
        raise ValueError(
            "witness pair is not eligible: a color outside the "
            "certificate needs a crossing edge")

    lim = eps * n * n
    cprime = set()
    for j in sorted(cset):
        g = family.masks[j]
        twice = sum((g[v] & amask).bit_count() for v in _bits(amask))
        twice += sum((g[v] & bmask).bit_count() for v in _bits(bmask))
        if twice // 2 <= lim:
            cprime.add(j)
    cprime.discard(i)
    kcols = sorted(set(range(m)) - cprime - {i})

    tallies = {}
    for att in range(retries):
        rng = rng_for(seed, "exceptional", att)
        try:
            used = 1 << u0
            forbid = 1 << v0
            coloring = {}
            pieces = [[u0]]
            for j in rng.sample(kcols, len(kcols)):
                g = family.masks[j]
                pool = []
                if j in cset:
                    for u in _bits(full & ~used & ~forbid):
                        sm = amask if (amask >> u) & 1 else bmask
                        for w in _bits(g[u] & sm & ~used & ~forbid):
                            if w > u:
                                pool.append((u, w))
                else:
                    for u in _bits(amask & ~used & ~forbid):
                        for w in _bits(g[u] & bmask & ~used & ~forbid):
                            pool.append((u, w))
                if not pool:
                    raise _Stuck("prefix-edge", f"color {j}")
                e = pool[rng.randrange(len(pool))]
                pieces.append(list(e))
                coloring[_norm(*e)] = j
                used |= _mask_of(e)
            free = set(cprime)
            order, used = _connect_pieces(
                family, rng, pieces, free, used, amask, bmask,
                "crossing", coloring, forbid=forbid, keep_first=True,
                cross_ends=False)
            w = order[-1]
            if ((amask >> w) & 1) == ((amask >> v0) & 1):
                om = bmask if (amask >> w) & 1 else amask
                placed = False
                for _ in range(200):
                    cand = om & ~used & ~forbid
                    if not cand:
                        break
                    z = _pick_bit(rng, cand)
                    opts = _free_color_options(family, sorted(free), w, z)
                    if opts:
                        c = rng.choice(opts)
                        free.discard(c)
                        coloring[_norm(w, z)] = c
                        used |= 1 << z
                        order.append(z)
                        placed = True
                        break
                if not placed:
                    raise _Stuck("end-parity")
                w = z
            rmask = (full & ~_mask_of(order)) | (1 << w)
            ra, rb = rmask & amask, rmask & bmask
            if ra.bit_count() != rb.bit_count():
                raise _Stuck("prefix-balance")
            rem = sorted(free)
            if (amask >> w) & 1:
                s_a, s_b = sorted(_bits(ra)), sorted(_bits(rb))
            else:
                s_a, s_b = sorted(_bits(rb)), sorted(_bits(ra))
            try:
                bp, bmeta = sample_bipartite_path(
                    family, rem, s_a, s_b, w, v0,
                    seed=derive_seed(seed, "extension", att), eps=eps)
            except (ValueError, RuntimeError) as ex:
                raise _Stuck("extension", str(ex)[:120])
            for (x, y), c in zip(zip(bp.order, bp.order[1:]), bp.colors):
                coloring[_norm(x, y)] = c
            path = order + list(bp.order[1:])
            colseq = [coloring[_norm(x, y)]
                      for x, y in zip(path, path[1:])]
            for (x, y), c in zip(zip(path, path[1:]), colseq):
                xc = ((amask >> x) & 1) != ((amask >> y) & 1)
                assert (c in cset) == xc, \
                    "path edge violates the certificate restriction"
            tv = Transversal("path", tuple(path), tuple(colseq))
            bad = validate_transversal(family, tv, spanning=True)
            assert not bad, f"exceptional path failed validation: {bad[:3]}"
            meta = {"attempts": att + 1, "prefix_len": len(order),
                    "c_prime": len(cprime), "tallies": tallies,
                    "extension": bmeta["mode"]}
            return tv, meta
        except _Stuck as ex:
            _tally(tallies, ex.stage)
            continue
    raise RuntimeError(
        f"exceptional path sampler exhausted {retries} attempts: {tallies}")


def _pick_witness(family, aset, cset, rng, tries=500):
    n = family.n
    amask = _mask_of(aset)
    full = (1 << n) - 1
    bmask = full & ~amask

    def row_for(c, v):
        sm = amask if (amask >> v) & 1 else bmask
        om = bmask if (amask >> v) & 1 else amask
        return family.masks[c][v] & (sm if c in cset else om)

    for _ in range(tries):
        c = rng.randrange(family.m)
        v = rng.randrange(n)
        row = row_for(c, v)
        if row:
            return ((v, _pick_bit(rng, row)), c)
    for c in range(family.m):
        for v in range(n):
            row = row_for(c, v)
            if row:
                return ((v, _pick_bit(rng, row)), c)
    return None


# ---------------------------------------------------------------------------
# route dispatcher


def _close_bipartite(family, frame, seed, eps, retries):
    last = None
    for att in range(retries):
        try:
            bp, bmeta = sample_bipartite_path(
                family, frame.colors, frame.side_a, frame.side_b,
                frame.path[0], frame.path[-1],
                seed=derive_seed(seed, "close", att), eps=eps)
        except (ValueError, RuntimeError) as ex:
            last = ex
            if isinstance(ex, ValueError):
                break
            continue
        colmap = dict(frame.coloring)
        for (x, y), c in zip(zip(bp.order, bp.order[1:]), bp.colors):
            colmap[_norm(x, y)] = c
        order = list(frame.path) + list(reversed(bp.order))[1:-1]
        colseq = [colmap[_norm(order[j], order[(j + 1) % len(order)])]
                  for j in range(len(order))]
        tv = Transversal("cycle", tuple(order), tuple(colseq))
        bad = validate_transversal(family, tv)
        assert not bad, f"extremal cycle failed validation: {bad[:3]}"
        return tv, {"case": "bipartite", "close_attempts": att + 1,
                    "frame_meta": frame.meta, "path_mode": bmeta["mode"]}
    raise RuntimeError(f"could not close the bipartite frame: {last}")


def _close_cliques(family, frame, seed, eps, retries):
    va1, vb1 = frame.path[0], frame.path[-1]
    va2, vb2 = frame.edge
    A, B = list(frame.side_a), list(frame.side_b)
    last = None
    for att in range(retries):
        rng = rng_for(seed, "close-cliques", att)
        cols = list(frame.colors)
        rng.shuffle(cols)
        ca, cb = cols[:len(A) - 1], cols[len(A) - 1:]
        resta = [v for v in A if v not in (va1, va2)]
        restb = [v for v in B if v not in (vb1, vb2)]
        rng.shuffle(resta)
        rng.shuffle(restb)
        ha, hb = len(A) // 2 - 1, len(B) // 2 - 1
        a1, a2 = [va1] + resta[:ha], [va2] + resta[ha:]
        b1, b2 = [vb1] + restb[:hb], [vb2] + restb[hb:]
        try:
            pa, pam = sample_bipartite_path(
                family, ca, a1, a2, va1, va2,
                seed=derive_seed(seed, "close-a", att), eps=eps)
            pb, pbm = sample_bipartite_path(
                family, cb, b1, b2, vb1, vb2,
                seed=derive_seed(seed, "close-b", att), eps=eps)
        except (ValueError, RuntimeError) as ex:
            last = ex
            continue
        colmap = dict(frame.coloring)
        colmap[_norm(va2, vb2)] = frame.edge_color
        for piece in (pa, pb):
            for (x, y), c in zip(zip(piece.order, piece.order[1:]),
                                 piece.colors):
                colmap[_norm(x, y)] = c
        order = (list(frame.path) + list(pb.order[1:]) +
                 list(reversed(pa.order))[:-1])
        colseq = [colmap[_norm(order[j], order[(j + 1) % len(order)])]
                  for j in range(len(order))]
        tv = Transversal("cycle", tuple(order), tuple(colseq))
        bad = validate_transversal(family, tv)
        assert not bad, f"two-cliques cycle failed validation: {bad[:3]}"
        return tv, {"case": "cliques", "close_attempts": att + 1,
                    "frame_meta": frame.meta,
                    "path_modes": (pam["mode"], pbm["mode"])}
    raise RuntimeError(f"could not close the two-cliques frame: {last}")


def _sample_extremal(family, params, seed, retries, half_set=None):
    eps = params["eps_cleanup"]
    if half_set is None:
        rep = is_family_extremal(family, params["alpha"],
                                 seed=derive_seed(seed, "extremality"))
        if not rep["extremal"]:
            raise ValueError(
                "family is not alpha-extremal; use the non-extremal "
                "pipeline instead")
        half_set = rep["half_set"]
    n = family.n
    cbip = _near_bipartite_colors(family, _mask_of(half_set), eps)
    bipartite_case = len(cbip) >= (1 - 100 * eps) * n
    last = None
    for f_att in range(3):
        try:
            if bipartite_case:
                frame = cleanup_bipartite(
                    family, seed=derive_seed(seed, "cleanup", f_att),
                    eps=eps, alpha=params["alpha"], tau=params["tau"],
                    half_set=half_set, checks=False)
                return _close_bipartite(
                    family, frame, derive_seed(seed, "assemble", f_att),
                    eps, retries)
            frame = cleanup_cliques(
                family, seed=derive_seed(seed, "cleanup", f_att),
                eps=eps, alpha=params["alpha"], tau=params["tau"],
                half_set=half_set, checks=False)
            return _close_cliques(
                family, frame, derive_seed(seed, "assemble", f_att),
                eps, retries)
        except RuntimeError as ex:
            last = ex
            continue
    raise RuntimeError(f"extremal route failed: {last}")


def _sample_exceptional_cycle(family, params, seed, retries, cert):
    aset, cset = set(cert[0]), set(cert[1])
    wit = _pick_witness(family, aset, cset,
                        rng_for(seed, "exceptional-witness"))
    if wit is None:
        raise RuntimeError(
            "the certificate reports a positive invariant but no witness "
            "edge was found")
    tv_path, pmeta = sample_exceptional_path(
        family, wit, seed=derive_seed(seed, "exceptional-path"),
        eps=params["eps_cleanup"], tau=params["tau"],
        cert=(sorted(aset), sorted(cset)), retries=max(retries, 12))
    (u0, v0), i = wit
    tv = Transversal("cycle", tv_path.order, tv_path.colors + (i,))
    bad = validate_transversal(family, tv)
    assert not bad, f"exceptional cycle failed validation: {bad[:3]}"
    return tv, {"witness": wit, "path_meta": pmeta}


def sample_transversal(family, params=None, seed=0, route="auto",
                       exact_cap=12, retries=10):
    """Sample a transversal Hamilton cycle, choosing the route by structure.

    Requires m == n and every color Dirac (min degree at least half of n,
    rounded up); violations raise ValueError. route "auto" solves exactly
    up to exact_cap vertices, then classifies: a zero parity invariant
    raises NoTransversalError with its certificate, a small one routes to
    the exceptional sampler, an extremality certificate routes to the
    cleanup plus staged-path assembly, and everything else runs the
    vortex pipeline (whose planner raises ValueError with a feasibility
    report when n is out of band for the preset). Forced routes run their
    own precondition checks. Returns (Transversal, meta) with the route,
    preset, and classifier verdicts recorded in meta.
    """
    params = dict(DESK) if params is None else dict(params)
    n, m = family.n, family.m
    if m != n:
        raise ValueError(f"need one color per vertex, got m={m} n={n}")
    need = (n + 1) // 2
    for c in range(m):
        d = family.min_degree(c)
        if d < need:
            raise ValueError(
                f"color {c} is not Dirac: min degree {d} < {need}")
    meta = {"preset": dict(params), "n": n}
    cert = None
    if route == "auto":
        if n <= exact_cap:
            route = "exact"
        else:
            # a dozen restarts cover the three descent basins at scale
            rst = max(12, min(50, 5000 // n))
            rrep = compute_r(family, seed=derive_seed(seed, "classify-r"),
                             restarts=rst, stop_below=params["tau"] * n * n)
            meta["classifier"] = {"r": rrep["r"]}
            if rrep["r"] == 0:
                raise NoTransversalError(
                    "no transversal exists: the parity invariant is zero "
                    "for the certificate bipartition",
                    half_set=rrep["half_set"], colors=rrep["colors"])
            if rrep["r"] <= params["tau"] * n * n:
                route = "exceptional"
                cert = (rrep["half_set"], rrep["colors"])
            else:
                erep = is_family_extremal(
                    family, params["alpha"], restarts=rst,
                    seed=derive_seed(seed, "classify-ext"))
                meta["classifier"]["extremal"] = bool(erep["extremal"])
                route = "extremal" if erep["extremal"] else "nonextremal"
                if route == "nonextremal":
                    plan = plan_vortex_sizes(
                        n, params["beta"], params["delta"], params["L"],
                        params.get("kappa", 1.02),
                        params.get("cap_hi", 0.25),
                        params.get("gamma", 0.35))
                    if not plan["feasible"] and n <= 64:
                        # the honest desk-scale path for mid-range n
                        route = "exact"
                        meta["fallback"] = (
                            f"vortex plan infeasible at n={n}, "
                            "solved exactly")

    meta["route"] = route
    if route == "exact":
        if n > 64:
            raise ValueError("exact route caps n at 64")
        res = find_transversal(family)
        if res.status == "none":
            raise NoTransversalError("no transversal exists (exact search)")
        if res.status != "found":
            raise RuntimeError(f"exact search gave up: {res.status}")
        tv = res.transversal
        bad = validate_transversal(family, tv)
        assert not bad, f"exact transversal failed validation: {bad[:3]}"
        meta["nodes"] = res.nodes
        return tv, meta
    if route == "nonextremal":
        tv, sub = sample_transversal_nonextremal(
            family, params, seed=derive_seed(seed, "route"), retries=retries,
            check_extremal="classifier" not in meta)
        meta.update(sub)
        meta["route"] = "nonextremal"
        return tv, meta
    if route == "extremal":
        tv, sub = _sample_extremal(
            family, params, derive_seed(seed, "route"), retries)
        meta.update(sub)
        return tv, meta
    if route == "exceptional":
        if cert is None:
            rrep = compute_r(family, seed=derive_seed(seed, "classify-r"),
                             stop_below=params["tau"] * n * n)
            if rrep["r"] == 0:
                raise NoTransversalError(
                    "no transversal exists: the parity invariant is zero "
                    "for the certificate bipartition",
                    half_set=rrep["half_set"], colors=rrep["colors"])
            if rrep["r"] > params["tau"] * n * n:
                raise ValueError(
                    f"family is not exceptional: r={rrep['r']}")
            cert = (rrep["half_set"], rrep["colors"])
        tv, sub = _sample_exceptional_cycle(
            family, params, derive_seed(seed, "route"), retries, cert)
        meta.update(sub)
        return tv, meta
    raise ValueError(f"unknown route {route!r}")
