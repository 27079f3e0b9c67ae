"""Half-set structure analysis: extremality, the parity invariant r, expansion.

Exact scans enumerate every half-set (and for r every odd color class via a
greedy argument), so they are capped at small n. Past the cap a swap-based
local search over half-sets gives certified upper bounds: a value at or below
the threshold proves extremality / exceptionality, a value above it is
reported with exact=False.
"""

import numpy as np

from . import backend
from ._seeds import derive_seed, np_rng_for
from .families import edge_minimal_reduction, graph_min_degree, random_graph

EXACT_SCAN_CAP = 24 if backend.BACKEND == "compiled" else 16
EXPANSION_CAP = 16


def _halfset_sizes(n):
    return (n // 2,) if n % 2 == 0 else ((n - 1) // 2, (n + 1) // 2)


def _mask_to_verts(mask, n):
    return [v for v in range(n) if (mask >> v) & 1]


def _verts_to_mask(verts):
    m = 0
    for v in verts:
        m |= 1 << v
    return m


def graph_halfset_value(adj, a_mask):
    """(inside, crossing, min) edge counts of a vertex subset, exact."""
    n = len(adj)
    inside = sum((adj[v] & a_mask).bit_count() for v in _mask_to_verts(a_mask, n)) // 2
    total = sum((adj[v]).bit_count() for v in _mask_to_verts(a_mask, n))
    cross = total - 2 * inside
    return inside, cross, min(inside, cross)


def family_halfset_value(family, a_mask):
    """Sum over colors of min(inside, crossing) at one half-set, exact."""
    return sum(graph_halfset_value(g, a_mask)[2] for g in family.masks)


def r_value_at(family, a_mask):
    """Greedy-optimal r contribution of one half-set: value and the color set.

    Each color independently prefers whichever of its inside count
    e(A) + e(complement) or crossing count is smaller; inclusion in C flips
    crossing to inside, and |C| must be odd, so if the greedy class has even
    size the color with the smallest swing is flipped (ties: lowest index).
    """
    inside_all = []
    cross_all = []
    for g in family.masks:
        ins, cr, _ = graph_halfset_value(g, a_mask)
        total = sum(r.bit_count() for r in g) // 2
        inside_all.append(total - cr)  # e(A) + e(complement)
        cross_all.append(cr)
    chosen = [c for c in range(family.m) if inside_all[c] < cross_all[c]]
    value = sum(min(i, x) for i, x in zip(inside_all, cross_all))
    if len(chosen) % 2 == 0:
        swings = [abs(inside_all[c] - cross_all[c]) for c in range(family.m)]
        c = min(range(family.m), key=lambda c: (swings[c], c))
        value += swings[c]
        if c in chosen:
            chosen.remove(c)
        else:
            chosen.append(c)
            chosen.sort()
    return value, chosen


class _SwapSearch:
    """Vectorized first-improvement swap search over fixed-size vertex subsets.

    Tracks, per color, S = sum of degrees inside A and the crossing count;
    inside counts follow as (S - cross) / 2. A swap (u out, v in) updates both
    in closed form, so a full candidate row costs one (m, |B|) broadcast.
    """

    def __init__(self, masks, n):
        self.n = n
        self.m = len(masks)
        if self.m * n * n > 2 * 10**9:
            raise ValueError("family too large for in-memory swap search")
        nbytes = (n + 7) // 8
        adj = np.empty((self.m, n, n), dtype=np.uint8)
        for c, g in enumerate(masks):
            raw = b"".join(row.to_bytes(nbytes, "little") for row in g)
            bits = np.unpackbits(
                np.frombuffer(raw, dtype=np.uint8), bitorder="little"
            )
            adj[c] = bits.reshape(n, nbytes * 8)[:, :n]
        self.adj = adj
        self.deg = adj.sum(axis=2, dtype=np.int64)

    def _state(self, a_list):
        dega = self.adj[:, :, a_list].sum(axis=2, dtype=np.int64)
        s = self.deg[:, a_list].sum(axis=1)
        e = dega[:, a_list].sum(axis=1) // 2
        return dega, s, s - 2 * e

    def run(self, objective, seed, restarts=50, max_sweeps=200, descend=None,
            stop_below=None):
        """Best half-set under `objective` over random restarts.

        Objectives built from min(inside, crossing) have a hill between
        the mixed-balanced basin and the one-side-concentrated basin that
        single swaps cannot cross, so extra descent objectives (pure
        crossing, pure inside) can be cycled through via `descend`; every
        endpoint is scored under the main objective regardless. stop_below
        ends the search as soon as a value at or under it is certified
        (the value is an upper bound, so the verdict cannot regress).
        """
        n = self.n
        best_val, best_a = None, None
        sizes = _halfset_sizes(n)
        descents = [objective] + list(descend or ())
        for it in range(restarts):
            rng = np_rng_for(seed, "swap", it)
            obj = descents[it % len(descents)]
            ka = sizes[it % len(sizes)]
            perm = rng.permutation(n)
            a_list = sorted(perm[:ka].tolist())
            b_list = sorted(perm[ka:].tolist())
            dega, s, cross = self._state(a_list)
            cur = obj(s, cross)
            for _ in range(max_sweeps):
                improved = False
                for ui in rng.permutation(len(a_list)):
                    u = a_list[ui]
                    bv = np.array(b_list)
                    s_new = s[:, None] - self.deg[:, u][:, None] + self.deg[:, bv]
                    cross_new = (
                        cross[:, None]
                        - self.deg[:, u][:, None]
                        + self.deg[:, bv]
                        + 2 * dega[:, u][:, None]
                        - 2 * dega[:, bv]
                        + 2 * self.adj[:, u, bv]
                    )
                    vals = obj(s_new, cross_new)
                    vi = int(np.argmin(vals))
                    if vals[vi] < cur:
                        v = b_list[vi]
                        s = s_new[:, vi]
                        cross = cross_new[:, vi]
                        dega = dega - self.adj[:, :, u] + self.adj[:, :, v]
                        a_list[ui] = v
                        b_list[vi] = u
                        cur = int(vals[vi])
                        improved = True
                        break
                if not improved:
                    break
            final = int(objective(s, cross)) if obj is not objective else cur
            if best_val is None or final < best_val:
                best_val, best_a = int(final), sorted(a_list)
            if stop_below is not None and best_val <= stop_below:
                break
        return best_val, best_a


def _obj_summin(s, cross):
    inside = (s - cross) // 2
    return np.minimum(inside, cross).sum(axis=0)


def _obj_cross(s, cross):
    return cross.sum(axis=0)


def _obj_inside(s, cross):
    return ((s - cross) // 2).sum(axis=0)


def _make_obj_r(totals):
    e_tot = np.asarray(totals, dtype=np.int64)

    def obj(s, cross):
        if cross.ndim == 1:
            cross = cross[:, None]
            squeeze = True
        else:
            squeeze = False
        inside = e_tot[:, None] - cross
        d = inside - cross
        base = np.minimum(inside, cross).sum(axis=0)
        odd = (d < 0).sum(axis=0) % 2
        fix = np.where(odd == 1, 0, np.abs(d).min(axis=0))
        out = base + fix
        return out[0] if squeeze else out

    return obj


def _resolve_mode(mode, n, cap):
    if mode == "auto":
        return "exact" if n <= cap else "heuristic"
    if mode == "exact" and n > cap:
        raise ValueError(f"exact scan caps n at {cap}")
    return mode


def is_graph_extremal(adj, alpha, mode="auto", seed=0, restarts=50, max_sweeps=200):
    """Does some half-set A have min(e(A), e(A, complement)) <= alpha n^2?"""
    n = len(adj)
    threshold = alpha * n * n
    mode = _resolve_mode(mode, n, EXACT_SCAN_CAP)
    if mode == "exact":
        val, a_mask = backend.graph_extremal_scan(n, tuple(adj))
        a = _mask_to_verts(a_mask, n)
    else:
        search = _SwapSearch((tuple(adj),), n)
        val, a = search.run(_obj_summin, derive_seed(seed, "gext"), restarts,
                            max_sweeps, descend=(_obj_cross, _obj_inside),
                            stop_below=threshold)
    return {
        "kind": "graph-extremal",
        "n": n,
        "alpha": alpha,
        "value": int(val),
        "threshold": threshold,
        "extremal": val <= threshold,
        "half_set": a,
        "exact": mode == "exact",
    }


def is_family_extremal(family, alpha, mode="auto", seed=0, restarts=50, max_sweeps=200):
    """Does some half-set make sum_c min(e_c(A), e_c(A, comp)) <= alpha m n^2?"""
    n = family.n
    threshold = alpha * family.m * n * n
    mode = _resolve_mode(mode, n, EXACT_SCAN_CAP)
    if mode == "exact":
        val, a_mask = backend.family_extremal_scan(n, family.masks)
        a = _mask_to_verts(a_mask, n)
    else:
        search = _SwapSearch(family.masks, n)
        val, a = search.run(_obj_summin, derive_seed(seed, "fext"), restarts,
                            max_sweeps, descend=(_obj_cross, _obj_inside),
                            stop_below=threshold)
    return {
        "kind": "family-extremal",
        "n": n,
        "m": family.m,
        "alpha": alpha,
        "value": int(val),
        "threshold": threshold,
        "extremal": val <= threshold,
        "half_set": a,
        "exact": mode == "exact",
    }


def compute_r(family, mode="auto", seed=0, restarts=50, max_sweeps=200,
              stop_below=None):
    """The parity invariant: minimum over half-sets A and odd color sets C of

        sum_{c in C} (e_c(A) + e_c(comp A)) + sum_{c not in C} e_c(A, comp A)

    Exact up to the scan cap; beyond it the swap search minimizes the greedy
    value, which is an upper bound realized by the reported certificate.
    stop_below (heuristic mode only) ends the search once a certificate at
    or under it is found, for callers that only need a threshold verdict.
    """
    n = family.n
    mode = _resolve_mode(mode, n, EXACT_SCAN_CAP)
    if mode == "exact":
        r, a_mask, c_mask = backend.compute_r_scan(n, family.masks)
        a = _mask_to_verts(a_mask, n)
        chosen = _mask_to_verts(c_mask, family.m)
    else:
        totals = [sum(row.bit_count() for row in g) // 2 for g in family.masks]
        search = _SwapSearch(family.masks, n)
        _, a = search.run(
            _make_obj_r(totals), derive_seed(seed, "r"), restarts, max_sweeps,
            descend=(_obj_cross, _obj_inside), stop_below=stop_below,
        )
        r, chosen = r_value_at(family, _verts_to_mask(a))
    return {
        "kind": "r",
        "n": n,
        "m": family.m,
        "r": int(r),
        "half_set": a,
        "colors": chosen,
        "exact": mode == "exact",
    }


def is_exceptional(family, tau=0.1, mode="auto", seed=0, restarts=50, max_sweeps=200):
    """r <= tau n^2 marks the family as exceptional (parity-obstructed)."""
    rep = compute_r(family, mode, seed, restarts, max_sweeps,
                    stop_below=tau * family.n * family.n)
    rep["kind"] = "exceptional"
    rep["tau"] = tau
    rep["threshold"] = tau * family.n * family.n
    rep["exceptional"] = rep["r"] <= rep["threshold"]
    return rep


def expansion_value(adj):
    """min over half-set pairs A, B of the ordered count sum_{v in A} |N(v) & B|.

    Overlapping pairs are allowed and often attain the minimum. Exact only;
    capped because the scan walks every half-set B.
    """
    n = len(adj)
    if n > EXPANSION_CAP:
        raise ValueError(f"expansion scan caps n at {EXPANSION_CAP}")
    val, a_mask, b_mask = backend.expansion_scan(n, tuple(adj))
    return int(val), _mask_to_verts(a_mask, n), _mask_to_verts(b_mask, n)


def expansion_check(adj, alpha, eps):
    """Certify e(A, B) >= alpha n^2 / 3 over all half-set pairs.

    The bound needs min degree at least (1/2 - eps) n and a non-extremal
    graph; inputs failing either precondition are reported as excluded
    rather than counterexamples.
    """
    n = len(adj)
    mindeg = graph_min_degree(adj)
    need = (0.5 - eps) * n
    ext = is_graph_extremal(adj, alpha, mode="exact") if n <= EXACT_SCAN_CAP else None
    excluded = None
    if mindeg < need:
        excluded = f"min degree {mindeg} below ({need:.2f})"
    elif ext is not None and ext["extremal"]:
        excluded = "graph is alpha-extremal"
    rep = {
        "kind": "expansion",
        "n": n,
        "alpha": alpha,
        "eps": eps,
        "bound": alpha * n * n / 3,
        "min_degree": mindeg,
        "excluded": excluded,
    }
    if excluded is None:
        val, a, b = expansion_value(adj)
        rep.update({"value": val, "a": a, "b": b, "holds": val >= rep["bound"]})
    return rep


def preservation_experiment(n, trials, alpha=0.1, p=0.85, seed=0):
    """Edge-minimal reduction keeps sparse half-sets two-sided sparse.

    For each trial graph, reduce to an edge-minimal Dirac subgraph, then scan
    every half-set A: whenever e(A) <= alpha n^2, the complement side must
    satisfy e(comp A) <= 3 alpha n^2. Returns counts and any violations.
    """
    from ._kernels_py import _halfset_ks, _ksubsets  # scan order helper

    antecedents = 0
    violations = []
    checked = 0
    for t in range(trials):
        adj = random_graph(n, p, derive_seed(seed, "preserve", t))
        adj = edge_minimal_reduction(adj, derive_seed(seed, "preserve-min", t))
        full = (1 << n) - 1
        for ka in _halfset_ks(n):
            for a_mask in _ksubsets(n, ka):
                checked += 1
                ea, _, _ = graph_halfset_value(adj, a_mask)
                if ea <= alpha * n * n:
                    antecedents += 1
                    eb, _, _ = graph_halfset_value(adj, full & ~a_mask)
                    if eb > 3 * alpha * n * n:
                        violations.append(
                            {"trial": t, "half_set": _mask_to_verts(a_mask, n)}
                        )
    return {
        "kind": "preservation",
        "n": n,
        "trials": trials,
        "alpha": alpha,
        "checked": checked,
        "antecedents": antecedents,
        "violations": violations,
        "holds": not violations,
    }
