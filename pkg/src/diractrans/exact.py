"""Exact transversal search, counting, and edge-disjoint packing.

Thin wrappers over the backend kernels plus the packing searches. Exact
methods are budgeted backtracking: they return "found", "none" (certified),
or "budget" (exhausted, undecided).
"""

from dataclasses import dataclass, field

from . import backend
from .families import ColoredFamily, Transversal

DEFAULT_BUDGET = 10**8


@dataclass
class SolveResult:
    status: str  # found | none | budget
    transversal: Transversal | None
    nodes: int
    meta: dict = field(default_factory=dict)


def find_transversal(family, budget=DEFAULT_BUDGET):
    """A rainbow Hamilton cycle using n distinct colors, or a certificate."""
    if family.n > 64:
        raise ValueError("exact search caps n at 64")
    status, order, colors, nodes = backend.find_transversal_cycle(
        family.n, family.masks, budget
    )
    if status == 1:
        return SolveResult("found", Transversal("cycle", tuple(order), tuple(colors)), nodes)
    return SolveResult("none" if status == 0 else "budget", None, nodes)


def count_transversals(family, budget=DEFAULT_BUDGET):
    """Exact count of (Hamilton cycle, rainbow coloring) pairs; needs m == n."""
    if family.n > 20:
        raise ValueError("exact counting caps n at 20")
    status, count, nodes = backend.count_transversals(
        family.n, family.masks, budget
    )
    return SolveResult(
        "found" if status == 1 else "budget", None, nodes, {"count": count}
    )


def find_transversal_path(family, u, v, budget=DEFAULT_BUDGET):
    """A rainbow Hamilton path from u to v using n-1 distinct colors."""
    if u == v:
        raise ValueError("endpoints must differ")
    if family.n > 64:
        raise ValueError("exact search caps n at 64")
    status, order, colors, nodes = backend.find_transversal_path(
        family.n, family.masks, u, v, budget
    )
    if status == 1:
        return SolveResult("found", Transversal("path", tuple(order), tuple(colors)), nodes)
    return SolveResult("none" if status == 0 else "budget", None, nodes)


def _remove_edges(family, edges):
    rows = [list(g) for g in family.masks]
    for u, v in edges:
        for g in rows:
            g[u] &= ~(1 << v)
            g[v] &= ~(1 << u)
    return ColoredFamily(family.n, [tuple(g) for g in rows])


def _enumerate_transversals(n, masks):
    """Lazy canonical enumeration (start 0, second < last), used by exact packing."""
    m = len(masks)
    full = (1 << n) - 1
    path = [0]
    colors = []

    def rec(u, used_v, used_c):
        if len(path) == n:
            if path[1] < path[-1]:
                for c in range(m):
                    if not (used_c >> c) & 1 and (masks[c][u] >> 0) & 1:
                        yield (tuple(path), tuple(colors + [c]))
            return
        avail = full & ~used_v
        for v in range(n):
            if not (avail >> v) & 1:
                continue
            for c in range(m):
                if (used_c >> c) & 1 or not (masks[c][u] >> v) & 1:
                    continue
                path.append(v)
                colors.append(c)
                yield from rec(v, used_v | (1 << v), used_c | (1 << c))
                path.pop()
                colors.pop()

    yield from rec(0, 1, 0)


def pack_edge_disjoint(family, k, strategy="greedy", budget=DEFAULT_BUDGET):
    """Up to k pairwise edge-disjoint transversal Hamilton cycles.

    greedy: solve, delete the used edges from every color, repeat; stops at
    the first failure. exact: depth-first search over lazily enumerated
    transversals with full backtracking (n <= 10), so a returned list shorter
    than k means no packing of size k exists.
    """
    if k == 0:
        return []
    if strategy == "greedy":
        out = []
        fam = family
        for _ in range(k):
            res = find_transversal(fam, budget)
            if res.status != "found":
                break
            out.append(res.transversal)
            fam = _remove_edges(fam, res.transversal.edges())
        return out
    if strategy != "exact":
        raise ValueError(f"unknown strategy {strategy!r}")
    if family.n > 10:
        raise ValueError("exact packing caps n at 10")

    best = []

    def rec(fam, acc):
        nonlocal best
        if len(acc) > len(best):
            best = list(acc)
        if len(acc) == k:
            return True
        # cheap bound: every vertex needs degree >= 2 in some color union
        union = [0] * fam.n
        for g in fam.masks:
            for v in range(fam.n):
                union[v] |= g[v]
        if any(r.bit_count() < 2 for r in union):
            return False
        for order, cols in _enumerate_transversals(fam.n, fam.masks):
            t = Transversal("cycle", order, cols)
            acc.append(t)
            if rec(_remove_edges(fam, t.edges()), acc):
                return True
            acc.pop()
        return False

    rec(family, [])
    return best


def packing_ceiling(family):
    """min over colors of floor(min degree / 2): an upper bound on pack size."""
    return min(
        min(g[v].bit_count() for v in range(family.n)) // 2
        for g in family.masks
    )
