"""Pure-Python kernels.

Deterministic integer loops shared with the compiled backend (_core.pyx).
Both implementations follow the same iteration order bit for bit, so every
caller gets identical results whichever backend is active. Nothing in here
draws randomness.

Conventions: vertices and colors are 0-based; vertex sets are bitmasks;
status codes are 1 (found), 0 (certified none), -1 (node budget exhausted).
"""

from collections import deque

# ---------------------------------------------------------------------------
# exact transversal search


class _Budget(Exception):
    pass


def _colors_with_edge(masks, used_c, u, v):
    out = []
    for c in range(len(masks)):
        if not (used_c >> c) & 1 and (masks[c][u] >> v) & 1:
            out.append(c)
    return out


def _union_rows(masks, used_c, scope):
    """Per-vertex neighbor masks of the union of unused colors, within scope."""
    m = len(masks)
    n = len(masks[0])
    rows = [0] * n
    v = scope
    while v:
        b = v & -v
        i = b.bit_length() - 1
        acc = 0
        for c in range(m):
            if not (used_c >> c) & 1:
                acc |= masks[c][i]
        rows[i] = acc & scope
        v ^= b
    return rows


def _scope_connected(rows, scope, start):
    seen = 1 << start
    frontier = seen
    while frontier:
        nxt = 0
        f = frontier
        while f:
            b = f & -f
            nxt |= rows[b.bit_length() - 1]
            f ^= b
        nxt &= scope & ~seen
        seen |= nxt
        frontier = nxt
    return seen & scope == scope


def _edges_in_scope(g, scope):
    s = scope
    while s:
        b = s & -s
        v = b.bit_length() - 1
        if g[v] & scope & ~b:
            return True
        s ^= b
    return False


def _hall_colors_edges(masks, used_c, scope, need):
    """Kuhn matching of unused colors into distinct scope edges; prune test.

    Returns True when `need` colors can be matched to pairwise distinct
    available edges. Only called for small n (caller gates at n <= 12).
    """
    n = len(masks[0])
    edges = []
    s = scope
    while s:
        b = s & -s
        u = b.bit_length() - 1
        s ^= b
        rest = scope & ~((b << 1) - 1)  # vertices above u
        t = rest
        while t:
            b2 = t & -t
            v = b2.bit_length() - 1
            edges.append((u, v))
            t ^= b2
    unused = [c for c in range(len(masks)) if not (used_c >> c) & 1]
    adj = []
    for c in unused:
        g = masks[c]
        row = [j for j, (u, v) in enumerate(edges) if (g[u] >> v) & 1]
        adj.append(row)
    match_e = [-1] * len(edges)

    def try_aug(i, seen):
        for j in adj[i]:
            if not seen[j]:
                seen[j] = True
                if match_e[j] < 0 or try_aug(match_e[j], seen):
                    match_e[j] = i
                    return True
        return False

    got = 0
    for i in range(len(unused)):
        if try_aug(i, [False] * len(edges)):
            got += 1
            if got >= need:
                return True
    return got >= need


def find_transversal_cycle(n, masks, budget):
    """Backtracking search for a rainbow Hamilton cycle.

    Start fixed at vertex 0, neighbors and colors tried in ascending order.
    Prunes: every unused color must keep an edge inside the remaining scope;
    the unused-color union restricted to the scope must be connected with
    enough degree; for n <= 12 and m == n, a Hall test matches unused colors
    to distinct available edges.
    """
    m = len(masks)
    if n < 3 or m < n:
        return (0, None, None, 0)
    full = (1 << n) - 1
    path = [0]
    colors = []
    state = {"nodes": 0}

    def prune(u, used_v, used_c):
        scope = (full & ~used_v) | (1 << u) | 1
        avail = full & ~used_v
        rows = _union_rows(masks, used_c, scope)
        a = avail
        while a:
            b = a & -a
            if rows[b.bit_length() - 1].bit_count() < 2:
                return False
            a ^= b
        if rows[0].bit_count() < 1 or rows[u].bit_count() < 1:
            return False
        if not _scope_connected(rows, scope, u):
            return False
        remaining = n - len(path) + 1
        have = 0
        for c in range(m):
            if not (used_c >> c) & 1 and _edges_in_scope(masks[c], scope):
                have += 1
                if have >= remaining:
                    break
        if have < remaining:
            return False
        if n <= 12:
            if not _hall_colors_edges(masks, used_c, scope, remaining):
                return False
        return True

    def rec(u, used_v, used_c):
        if len(path) == n:
            for c in range(m):
                if not (used_c >> c) & 1 and (masks[c][u] >> 0) & 1:
                    colors.append(c)
                    return True
            return False
        if not prune(u, used_v, used_c):
            return False
        avail = full & ~used_v
        for v in range(n):
            if not (avail >> v) & 1:
                continue
            for c in _colors_with_edge(masks, used_c, u, v):
                state["nodes"] += 1
                if state["nodes"] > budget:
                    raise _Budget
                path.append(v)
                colors.append(c)
                if rec(v, used_v | (1 << v), used_c | (1 << c)):
                    return True
                path.pop()
                colors.pop()
        return False

    try:
        found = rec(0, 1, 0)
    except _Budget:
        return (-1, None, None, state["nodes"])
    if found:
        return (1, path[:], colors[:], state["nodes"])
    return (0, None, None, state["nodes"])


def find_transversal_path(n, masks, s, t, budget):
    """Rainbow Hamilton path from s to t: n vertices, n-1 distinct colors."""
    m = len(masks)
    if n < 2 or m < n - 1 or s == t:
        return (0, None, None, 0)
    full = (1 << n) - 1
    path = [s]
    colors = []
    state = {"nodes": 0}

    def prune(u, used_v, used_c):
        scope = (full & ~used_v) | (1 << u)
        avail = full & ~used_v & ~(1 << t)
        rows = _union_rows(masks, used_c, scope)
        a = avail
        while a:
            b = a & -a
            if rows[b.bit_length() - 1].bit_count() < 2:
                return False
            a ^= b
        if rows[t].bit_count() < 1 or rows[u].bit_count() < 1:
            return False
        if not _scope_connected(rows, scope, u):
            return False
        remaining = n - len(path)
        have = 0
        for c in range(m):
            if not (used_c >> c) & 1 and _edges_in_scope(masks[c], scope):
                have += 1
                if have >= remaining:
                    break
        if have < remaining:
            return False
        if n <= 12:
            if not _hall_colors_edges(masks, used_c, scope, remaining):
                return False
        return True

    def rec(u, used_v, used_c):
        if len(path) == n:
            return u == t
        if not prune(u, used_v, used_c):
            return False
        avail = full & ~used_v
        last_step = len(path) == n - 1
        for v in range(n):
            if not (avail >> v) & 1:
                continue
            if v == t and not last_step:
                continue
            for c in _colors_with_edge(masks, used_c, u, v):
                state["nodes"] += 1
                if state["nodes"] > budget:
                    raise _Budget
                path.append(v)
                colors.append(c)
                if rec(v, used_v | (1 << v), used_c | (1 << c)):
                    return True
                path.pop()
                colors.pop()
        return False

    if not (0 <= s < n and 0 <= t < n):
        return (0, None, None, 0)
    try:
        found = rec(s, 1 << s, 0)
    except _Budget:
        return (-1, None, None, state["nodes"])
    if found:
        return (1, path[:], colors[:], state["nodes"])
    return (0, None, None, state["nodes"])


def _permanent(rows_sums_matrix, n):
    """Ryser permanent of an n x n 0/1 matrix given as row bitmask list."""
    total = 0
    for s in range(1, 1 << n):
        prod = 1
        for i in range(n):
            r = (rows_sums_matrix[i] & s).bit_count()
            if r == 0:
                prod = 0
                break
            prod *= r
        if prod:
            if (n - s.bit_count()) & 1:
                total -= prod
            else:
                total += prod
    return total


def count_transversals(n, masks, budget):
    """Count rainbow Hamilton cycles as (cycle, coloring) pairs.

    Cycles are enumerated once each (start 0, second vertex < last vertex) on
    the union graph, then the colorings of a cycle are counted by the
    permanent of its edge/color incidence matrix. Requires m == n.
    """
    m = len(masks)
    if m != n:
        raise ValueError("counting needs exactly n colors")
    if n < 3:
        return (0, 0, 0)
    full = (1 << n) - 1
    union = [0] * n
    for v in range(n):
        acc = 0
        for c in range(m):
            acc |= masks[c][v]
        union[v] = acc
    path = [0]
    state = {"nodes": 0, "count": 0}

    def close_value():
        edges = [(path[i], path[i + 1]) for i in range(n - 1)]
        edges.append((path[-1], 0))
        rows = []
        for u, v in edges:
            r = 0
            for c in range(m):
                if (masks[c][u] >> v) & 1:
                    r |= 1 << c
            rows.append(r)
        return _permanent(rows, n)

    def rec(u, used_v):
        if len(path) == n:
            if (union[u] >> 0) & 1 and path[1] < path[-1]:
                state["count"] += close_value()
            return
        avail = full & ~used_v
        for v in range(n):
            if not (avail >> v) & 1 or not (union[u] >> v) & 1:
                continue
            state["nodes"] += 1
            if state["nodes"] > budget:
                raise _Budget
            path.append(v)
            rec(v, used_v | (1 << v))
            path.pop()

    try:
        rec(0, 1)
    except _Budget:
        return (-1, 0, state["nodes"])
    return (1, state["count"], state["nodes"])


# ---------------------------------------------------------------------------
# half-set scans


def _ksubsets(n, k):
    """All k-subsets of [n] as bitmasks, ascending (Gosper)."""
    if k == 0:
        yield 0
        return
    v = (1 << k) - 1
    top = 1 << n
    while v < top:
        yield v
        c = v & -v
        r = v + c
        v = (((r ^ v) >> 2) // c) | r


def _halfset_ks(n):
    return [n // 2] if n % 2 == 0 else [(n - 1) // 2, (n + 1) // 2]


def _inside(rows, a_mask):
    tot = 0
    a = a_mask
    while a:
        b = a & -a
        tot += (rows[b.bit_length() - 1] & a_mask).bit_count()
        a ^= b
    return tot // 2


def _cross(rows, a_mask, full):
    b_mask = full & ~a_mask
    tot = 0
    a = a_mask
    while a:
        b = a & -a
        tot += (rows[b.bit_length() - 1] & b_mask).bit_count()
        a ^= b
    return tot


def graph_extremal_scan(n, rows):
    """min over half-sets A of min(e(A), e(A, complement)); returns (val, A)."""
    full = (1 << n) - 1
    best = -1
    best_a = 0
    for k in _halfset_ks(n):
        for a in _ksubsets(n, k):
            v = min(_inside(rows, a), _cross(rows, a, full))
            if best < 0 or v < best:
                best = v
                best_a = a
    return (best, best_a)


def family_extremal_scan(n, masks):
    """min over half-sets A of sum_c min(e_c(A), e_c(A, complement))."""
    full = (1 << n) - 1
    best = -1
    best_a = 0
    for k in _halfset_ks(n):
        for a in _ksubsets(n, k):
            tot = 0
            for g in masks:
                tot += min(_inside(g, a), _cross(g, a, full))
                if best >= 0 and tot >= best:
                    break
            if best < 0 or tot < best:
                best = tot
                best_a = a
    return (best, best_a)


def compute_r_scan(n, masks):
    """Exact r: min over half-sets A and odd color sets C of e_C(A).

    Per A the optimal C is greedy: take color c iff inside_c < cross_c where
    inside_c = e_c(A)+e_c(comp); if that C has even size, flip the color of
    smallest |inside_c - cross_c| (ties: lowest index). Returns (r, A, C).
    """
    m = len(masks)
    full = (1 << n) - 1
    best = -1
    best_a = 0
    best_c = 0
    for k in _halfset_ks(n):
        for a in _ksubsets(n, k):
            b_mask = full & ~a
            base = 0
            cmask = 0
            flip_cost = -1
            flip_c = -1
            for c in range(m):
                g = masks[c]
                ins = _inside(g, a) + _inside(g, b_mask)
                cro = _cross(g, a, full)
                d = ins - cro
                if d < 0:
                    cmask |= 1 << c
                    base += ins
                else:
                    base += cro
                ad = -d if d < 0 else d
                if flip_cost < 0 or ad < flip_cost:
                    flip_cost = ad
                    flip_c = c
            if cmask.bit_count() % 2 == 0:
                base += flip_cost
                cmask ^= 1 << flip_c
            if best < 0 or base < best:
                best = base
                best_a = a
                best_c = cmask
    return (best, best_a, best_c)


def expansion_scan(n, rows):
    """min over ordered half-set pairs (A,B) of e(A,B) = sum_{v in A} |N(v) & B|.

    For fixed B the best A is the half-set of smallest per-vertex counts, so
    the scan is linear in the number of half-sets. Ties inside the sort fall
    to lower vertex index. Returns (value, A, B).
    """
    best = -1
    best_a = 0
    best_b = 0
    ka = min(_halfset_ks(n))
    for kb in _halfset_ks(n):
        for b in _ksubsets(n, kb):
            s = []
            for v in range(n):
                s.append(((rows[v] & b).bit_count(), v))
            s.sort()
            val = 0
            a_mask = 0
            for cnt, v in s[:ka]:
                val += cnt
                a_mask |= 1 << v
            if best < 0 or val < best:
                best = val
                best_a = a_mask
                best_b = b
    return (best, best_a, best_b)


# ---------------------------------------------------------------------------
# maximum bipartite matching (Hopcroft-Karp)


def hk_matching(n_left, n_right, adj):
    """Maximum matching; adj[i] is an ascending neighbor list of left i.

    Deterministic: BFS layers and DFS augmentation scan vertices and
    neighbors in ascending order, so both backends return the same matching.
    Returns match_left (length n_left, -1 for unmatched).
    """
    INF = n_left + n_right + 1
    match_l = [-1] * n_left
    match_r = [-1] * n_right
    dist = [0] * n_left

    def bfs():
        q = deque()
        for u in range(n_left):
            if match_l[u] < 0:
                dist[u] = 0
                q.append(u)
            else:
                dist[u] = INF
        reachable_free = False
        while q:
            u = q.popleft()
            for v in adj[u]:
                w = match_r[v]
                if w < 0:
                    reachable_free = True
                elif dist[w] == INF:
                    dist[w] = dist[u] + 1
                    q.append(w)
        return reachable_free

    def dfs(u):
        for v in adj[u]:
            w = match_r[v]
            if w < 0 or (dist[w] == dist[u] + 1 and dfs(w)):
                match_l[u] = v
                match_r[v] = u
                return True
        dist[u] = INF
        return False

    while bfs():
        for u in range(n_left):
            if match_l[u] < 0:
                dfs(u)
    return match_l
