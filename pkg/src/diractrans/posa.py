"""Rotation-extension search for Hamilton cycles through a forced matching.

The engine grows a path that must contain every matching edge whose
endpoints it touches (extending onto a matched vertex immediately pulls in
its partner, and rotations refuse to break matching edges), so any cycle it
closes contains the whole matching. Stuck paths escape by rotating the
endpoint set, and non-spanning cycles are reopened at an edge off the
matching next to an unvisited neighbor. Randomized restarts make the search
Las Vegas: output is always verified, only the time varies.

Hamilton paths reduce to cycles through one extra vertex: with both
endpoints fixed the extra vertex gets exactly those two neighbors, with one
fixed it gets a forced matching edge there.
"""

from dataclasses import dataclass

from ._seeds import rng_for

ROTATION_DEPTH = 3


@dataclass
class HamResult:
    status: str  # found | failed
    order: tuple | None
    obstruction: str | None
    attempts: int

    @property
    def found(self):
        return self.status == "found"


def _bits(mask):
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def _check_matching(n, adj, matching):
    mpair = {}
    for u, v in matching:
        if u == v or not (0 <= u < n and 0 <= v < n):
            raise ValueError(f"bad matching edge ({u}, {v})")
        if u in mpair or v in mpair:
            raise ValueError("matching edges share a vertex")
        if not (adj[u] >> v) & 1:
            raise ValueError(f"matching edge ({u}, {v}) not in graph")
        mpair[u] = v
        mpair[v] = u
    return mpair


def _connected(n, adj):
    seen = 1
    stack = [0]
    while stack:
        u = stack.pop()
        new = adj[u] & ~seen
        seen |= new
        stack.extend(_bits(new))
    return seen == (1 << n) - 1


def rotate(path, pivot, adj, mpair):
    """One rotation of the right endpoint around a pivot vertex.

    For path p0..pk and pivot pi adjacent to pk, the edge (pi, p(i+1)) is
    replaced by (pi, pk), reversing the tail. Raises if the pivot edge is
    absent or the broken edge is a matching edge.
    """
    end = path[-1]
    try:
        i = path.index(pivot)
    except ValueError:
        raise ValueError(f"pivot {pivot} not on path") from None
    if i >= len(path) - 2:
        raise ValueError(f"pivot {pivot} too close to the endpoint")
    if not (adj[end] >> pivot) & 1:
        raise ValueError(f"pivot edge ({pivot}, {end}) not in graph")
    if mpair.get(path[i]) == path[i + 1]:
        raise ValueError(
            f"rotation would break matching edge ({path[i]}, {path[i + 1]})"
        )
    return path[: i + 1] + path[i + 1 :][::-1]


def _endpoint_closure(path, adj, mpair, depth):
    """Endpoints reachable by at most depth rotations of the right end.

    Returns {endpoint: pivot list}; replaying the pivots reproduces the
    rotated path, so every reported endpoint comes with a certificate.
    """
    seen = {path[-1]: []}
    frontier = [(path, [])]
    for _ in range(depth):
        nxt = []
        for p, cert in frontier:
            row = adj[p[-1]]
            for i in range(len(p) - 2):
                if not (row >> p[i]) & 1:
                    continue
                if mpair.get(p[i]) == p[i + 1]:
                    continue
                q = p[: i + 1] + p[i + 1 :][::-1]
                e = q[-1]
                if e not in seen:
                    seen[e] = cert + [p[i]]
                    nxt.append((q, cert + [p[i]]))
        frontier = nxt
    return seen


def _replay(path, pivots, adj, mpair):
    for piv in pivots:
        path = rotate(path, piv, adj, mpair)
    return path


def _try_extend(path, onpath, adj, mpair, rng):
    """Append one vertex (plus its matching partner if it has one)."""
    end = path[-1]
    cands = [v for v in _bits(adj[end]) if v not in onpath]
    rng.shuffle(cands)
    for v in cands:
        w = mpair.get(v)
        if w is None:
            path.append(v)
            onpath.add(v)
            return True
        # partner off the path is automatic: a used partner would already
        # have pulled its matching edge onto the path
        path.append(v)
        path.append(w)
        onpath.add(v)
        onpath.add(w)
        return True
    return False


def _close_to_cycle(path, adj, mpair):
    """Rotate until the endpoints are adjacent; returns the cycle or None."""
    for flip in (False, True):
        p = path[::-1] if flip else path
        first = p[0]
        if (adj[p[-1]] >> first) & 1:
            return p
        for e, cert in _endpoint_closure(p, adj, mpair, ROTATION_DEPTH).items():
            if (adj[e] >> first) & 1:
                return _replay(p, cert, adj, mpair)
    return None


def _reopen(cycle, adj, mpair, onmask):
    """Break a non-matching cycle edge beside a vertex that sees outside.

    Returns a path ending at that vertex, ready to extend. A vertex has at
    most one matching edge, so one of its two cycle edges is always
    breakable.
    """
    k = len(cycle)
    for i, u in enumerate(cycle):
        if not (adj[u] & ~onmask):
            continue
        if mpair.get(u) != cycle[(i + 1) % k]:
            j = (i + 1) % k
            return cycle[j:] + cycle[:j]  # ends at u
        return list(reversed(cycle[i:] + cycle[:i]))  # ends at u
    return None


def _mask(vs):
    m = 0
    for v in vs:
        m |= 1 << v
    return m


def _attempt(n, adj, mpair, rng):
    start = rng.randrange(n)
    path = [start] if start not in mpair else [start, mpair[start]]
    onpath = set(path)
    guard = 8 * n + 40
    while guard:
        guard -= 1
        if len(path) == n:
            cyc = _close_to_cycle(path, adj, mpair)
            return tuple(cyc) if cyc else None
        if _try_extend(path, onpath, adj, mpair, rng):
            continue
        progressed = False
        for flip in (False, True):
            p = path[::-1] if flip else path
            ends = list(_endpoint_closure(p, adj, mpair, ROTATION_DEPTH).items())
            rng.shuffle(ends)
            for _, cert in ends:
                q = _replay(p, cert, adj, mpair)
                qset = set(q)
                if _try_extend(q, qset, adj, mpair, rng):
                    path, onpath = q, qset
                    progressed = True
                    break
            if progressed:
                break
        if progressed:
            continue
        # stuck path: close it into a (non-spanning) cycle, then break the
        # cycle next to a vertex that sees outside, and grow from there
        if len(path) < 3:
            return None
        cyc = _close_to_cycle(path, adj, mpair)
        if cyc is None:
            return None
        reopened = _reopen(list(cyc), adj, mpair, _mask(onpath))
        if reopened is None:
            return None
        path = reopened
        onpath = set(path)
    return None


def _verify_cycle(n, adj, matching, order):
    assert len(order) == n and len(set(order)) == n
    for i in range(n):
        u, v = order[i], order[(i + 1) % n]
        assert (adj[u] >> v) & 1, f"({u}, {v}) not an edge"
    on_cycle = {
        frozenset((order[i], order[(i + 1) % n])) for i in range(n)
    }
    for e in matching:
        assert frozenset(e) in on_cycle, f"matching edge {e} missing"


def robust_hamilton(n, adj, matching=(), seed=0, restarts=200):
    """A Hamilton cycle containing every matching edge.

    adj is a list of n neighbor bitmask rows; matching is a list of edges
    that must appear on the cycle. Returns a HamResult; failures carry an
    obstruction string when one is certain (disconnected graph, low degree)
    and "restarts exhausted" when the search merely gave up.
    """
    if n < 3:
        raise ValueError("need at least 3 vertices")
    mpair = _check_matching(n, adj, matching)
    for v in range(n):
        if adj[v].bit_count() < 2:
            return HamResult("failed", None, f"vertex {v} has degree < 2", 0)
    if not _connected(n, adj):
        return HamResult("failed", None, "disconnected", 0)
    for attempt in range(restarts):
        rng = rng_for(seed, "posa", attempt)
        order = _attempt(n, adj, mpair, rng)
        if order is not None:
            _verify_cycle(n, adj, matching, order)
            return HamResult("found", order, None, attempt + 1)
    return HamResult("failed", None, "restarts exhausted", restarts)


def hamilton_path(n, adj, s=None, t=None, matching=(), seed=0, restarts=200):
    """A Hamilton path, optionally with fixed endpoints, through a matching.

    Reduces to robust_hamilton with an auxiliary vertex x: with s and t
    given, x sees exactly s and t, so any cycle through x yields an s-t
    path; with only s given, the edge (x, s) is forced via the matching.
    """
    if s is not None and s == t:
        raise ValueError("endpoints must differ")
    if t is not None and s is None:
        s, t = t, None
    x = n
    if s is not None and t is not None:
        xrow = (1 << s) | (1 << t)
    else:
        xrow = (1 << n) - 1
    rows = [r | (((xrow >> v) & 1) << x) for v, r in enumerate(adj)]
    rows.append(xrow)
    forced = list(matching)
    if s is not None and t is None:
        forced.append((x, s))
    res = robust_hamilton(n + 1, rows, forced, seed, restarts)
    if not res.found:
        return res
    cyc = list(res.order)
    i = cyc.index(x)
    path = cyc[i + 1 :] + cyc[:i]
    if s is not None and path[-1] == s:
        path.reverse()
    if s is not None:
        assert path[0] == s
    if t is not None:
        assert path[-1] == t
    return HamResult("found", tuple(path), None, res.attempts)


def exact_hamilton_with_matching(n, adj, matching=(), budget=10**7):
    """Exhaustive search, for cross-checking the engine on small graphs."""
    if n > 12:
        raise ValueError("exact cross-check caps n at 12")
    mpair = _check_matching(n, adj, matching)
    nodes = [0]

    def rec(path, used):
        nodes[0] += 1
        if nodes[0] > budget:
            raise RuntimeError("budget exhausted")
        u = path[-1]
        if len(path) == n:
            if not (adj[u] >> path[0]) & 1:
                return None
            on = {frozenset((path[i], path[(i + 1) % n])) for i in range(n)}
            if all(frozenset(e) in on for e in matching):
                return tuple(path)
            return None
        p = mpair.get(u)
        prev = path[-2] if len(path) >= 2 else None
        for v in _bits(adj[u]):
            if v in used:
                continue
            # once u turns interior its matching edge must be one of its
            # two path edges; the start vertex may still close on its own
            if p is not None and prev is not None and prev != p and v != p:
                continue
            path.append(v)
            used.add(v)
            out = rec(path, used)
            if out:
                return out
            path.pop()
            used.remove(v)
        return None

    return rec([0], {0})


def final_step_graph(family, colors, threshold):
    """Plain graph keeping the edges that at least threshold colors share."""
    n = family.n
    rows = [0] * n
    for u in range(n):
        for v in range(u + 1, n):
            cnt = sum(1 for c in colors if (family.masks[c][u] >> v) & 1)
            if cnt >= threshold:
                rows[u] |= 1 << v
                rows[v] |= 1 << u
    return rows
