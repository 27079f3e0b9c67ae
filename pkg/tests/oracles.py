"""Independent brute-force oracles.

Stdlib-only reference implementations used to freeze expected values and to
cross-check the package. Nothing here imports diractrans; the algorithms are
deliberately naive (permutation enumeration, full subset scans, Kuhn
matching) so they share no code or structure with the implementations they
check.
"""

from itertools import combinations, permutations

# ---------------------------------------------------------------------------
# transversal enumeration


def _adj_sets(n, colors_edges):
    out = []
    for edges in colors_edges:
        s = set()
        for u, v in edges:
            s.add((u, v))
            s.add((v, u))
        out.append(s)
    return out


def _cycle_edge_lists(n):
    for perm in permutations(range(1, n)):
        if perm[0] > perm[-1]:
            continue
        cyc = (0,) + perm
        edges = [(cyc[i], cyc[(i + 1) % n]) for i in range(n)]
        yield cyc, edges


def _count_assignments(edges, adj, m):
    def rec(i, used):
        if i == len(edges):
            return 1
        u, v = edges[i]
        tot = 0
        for c in range(m):
            if c not in used and (u, v) in adj[c]:
                used.add(c)
                tot += rec(i + 1, used)
                used.discard(c)
        return tot

    return rec(0, set())


def oracle_count_transversals(n, colors_edges):
    """Number of (Hamilton cycle, rainbow coloring) pairs, cycles canonical."""
    adj = _adj_sets(n, colors_edges)
    m = len(colors_edges)
    total = 0
    for _cyc, edges in _cycle_edge_lists(n):
        total += _count_assignments(edges, adj, m)
    return total


def oracle_find_transversal(n, colors_edges):
    """Some (cycle, colors) witness, or None."""
    adj = _adj_sets(n, colors_edges)
    m = len(colors_edges)

    def assign(edges, i, used, acc):
        if i == len(edges):
            return list(acc)
        u, v = edges[i]
        for c in range(m):
            if c not in used and (u, v) in adj[c]:
                used.add(c)
                acc.append(c)
                got = assign(edges, i + 1, used, acc)
                if got is not None:
                    return got
                acc.pop()
                used.discard(c)
        return None

    for cyc, edges in _cycle_edge_lists(n):
        got = assign(edges, 0, set(), [])
        if got is not None:
            return cyc, got
    return None


def oracle_count_containing(n, colors_edges, edge, color):
    """Transversals whose coloring sends `edge` to `color`."""
    adj = _adj_sets(n, colors_edges)
    m = len(colors_edges)
    u0, v0 = edge
    total = 0
    for _cyc, edges in _cycle_edge_lists(n):
        hit = None
        for i, (u, v) in enumerate(edges):
            if (u, v) == (u0, v0) or (u, v) == (v0, u0):
                hit = i
                break
        if hit is None:
            continue
        if (u0, v0) not in adj[color]:
            continue

        def rec(i, used):
            if i == len(edges):
                return 1
            u, v = edges[i]
            if i == hit:
                if color in used or (u, v) not in adj[color]:
                    return 0
                used.add(color)
                t = rec(i + 1, used)
                used.discard(color)
                return t
            tot = 0
            for c in range(m):
                if c not in used and (u, v) in adj[c]:
                    used.add(c)
                    tot += rec(i + 1, used)
                    used.discard(c)
            return tot

        total += rec(0, set())
    return total


# ---------------------------------------------------------------------------
# half-set quantities


def _half_sets(n):
    ks = [n // 2] if n % 2 == 0 else [(n - 1) // 2, (n + 1) // 2]
    for k in ks:
        for a in combinations(range(n), k):
            yield set(a)


def _e_inside(edge_set, a):
    return sum(1 for u, v in edge_set if u in a and v in a)


def _e_cross(edge_set, a, b):
    return sum(
        1 for u, v in edge_set if (u in a and v in b) or (u in b and v in a)
    )


def oracle_graph_extremal_value(n, edges):
    es = [(u, v) for u, v in edges]
    best = None
    for a in _half_sets(n):
        comp = set(range(n)) - a
        val = min(_e_inside(es, a), _e_cross(es, a, comp))
        if best is None or val < best:
            best = val
    return best


def oracle_family_extremal_value(n, colors_edges):
    best = None
    for a in _half_sets(n):
        comp = set(range(n)) - a
        tot = 0
        for es in colors_edges:
            tot += min(_e_inside(es, a), _e_cross(es, a, comp))
        if best is None or tot < best:
            best = tot
    return best


def oracle_r(n, colors_edges):
    """min over half-sets A and odd color subsets C of e_C(G, A)."""
    m = len(colors_edges)
    best = None
    for a in _half_sets(n):
        comp = set(range(n)) - a
        inside = []
        cross = []
        for es in colors_edges:
            inside.append(_e_inside(es, a) + _e_inside(es, comp))
            cross.append(_e_cross(es, a, comp))
        for size in range(1, m + 1, 2):
            for cset in combinations(range(m), size):
                cc = set(cset)
                val = sum(
                    inside[c] if c in cc else cross[c] for c in range(m)
                )
                if best is None or val < best:
                    best = val
    return best


def oracle_expansion(n, edges):
    """min over ordered half-set pairs (A,B) of #{(u,v): u in A, v in B, uv edge}."""
    nbr = [set() for _ in range(n)]
    for u, v in edges:
        nbr[u].add(v)
        nbr[v].add(u)
    best = None
    halves = list(_half_sets(n))
    for a in halves:
        for b in halves:
            val = sum(len(nbr[u] & b) for u in a)
            if best is None or val < best:
                best = val
    return best


# ---------------------------------------------------------------------------
# matchings and Hamilton cycles


def oracle_max_matching_size(n_left, n_right, adj):
    """Kuhn's algorithm, recursion-free path growth per left vertex."""
    match_r = [-1] * n_right

    def try_one(u, seen):
        for v in adj[u]:
            if v in seen:
                continue
            seen.add(v)
            if match_r[v] < 0 or try_one(match_r[v], seen):
                match_r[v] = u
                return True
        return False

    got = 0
    for u in range(n_left):
        if try_one(u, set()):
            got += 1
    return got


def oracle_hamilton_with_forced(n, adj_sets, forced):
    """A Hamilton cycle containing every forced edge, or None. Brute DFS."""
    forced_at = [set() for _ in range(n)]
    for u, v in forced:
        forced_at[u].add(v)
        forced_at[v].add(u)

    path = [0]
    seen = {0}

    def pending_ok():
        # every forced edge must still be placeable
        for u, v in forced:
            placed = False
            for i in range(len(path) - 1):
                if {path[i], path[i + 1]} == {u, v}:
                    placed = True
                    break
            if placed:
                continue
            if u in seen and v in seen:
                return False
            if u in seen and path[-1] != u and u != path[0]:
                return False
            if v in seen and path[-1] != v and v != path[0]:
                return False
        return True

    def rec():
        u = path[-1]
        if len(path) == n:
            if 0 in adj_sets[u] and pending_ok():
                ok = True
                for x, y in forced:
                    edges = {
                        frozenset((path[i], path[(i + 1) % n]))
                        for i in range(n)
                    }
                    if frozenset((x, y)) not in edges:
                        ok = False
                        break
                if ok:
                    return list(path)
            return None
        must = forced_at[u] - seen
        cands = sorted(must) if must else sorted(adj_sets[u] - seen)
        for v in cands:
            if v not in adj_sets[u]:
                continue
            path.append(v)
            seen.add(v)
            got = rec()
            if got is not None:
                return got
            path.pop()
            seen.discard(v)
        return None

    return rec()
