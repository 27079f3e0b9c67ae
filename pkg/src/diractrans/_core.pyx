# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels.

C twins of _kernels_py: the same algorithms in the same iteration order, so
results are bit-identical between backends. Caps: exact search handles
n, m <= 64 (uint64 vertex masks, uint64 color masks); scans handle n <= 24.
"""

from libc.stdlib cimport malloc, free
from libc.string cimport memset

cdef extern from *:
    """
    static inline int popcount64(unsigned long long x) {
        return __builtin_popcountll(x);
    }
    static inline int ctz64(unsigned long long x) {
        return __builtin_ctzll(x);
    }
    """
    int popcount64(unsigned long long x) nogil
    int ctz64(unsigned long long x) nogil

ctypedef unsigned long long u64


# ---------------------------------------------------------------------------
# shared state for the exact searches

cdef struct SearchState:
    int n
    int m
    u64 g[64][64]          # g[c][v]: neighbors of v in color c
    int path[65]
    int cols[65]
    int depth
    long long nodes
    long long budget
    int budget_hit


cdef int _load_masks(SearchState* st, int n, object masks) except -1:
    cdef int m = len(masks)
    cdef int c, v
    if n > 64 or m > 64:
        raise ValueError("compiled exact kernels cap n, m at 64")
    st.n = n
    st.m = m
    for c in range(m):
        row = masks[c]
        for v in range(n):
            st.g[c][v] = <u64> row[v]
    return 0


cdef bint _scope_connected_c(u64* rows, u64 scope, int start) nogil:
    cdef u64 seen = (<u64>1) << start
    cdef u64 frontier = seen
    cdef u64 nxt, f, b
    while frontier:
        nxt = 0
        f = frontier
        while f:
            b = f & (~f + 1)
            nxt |= rows[ctz64(b)]
            f ^= b
        nxt &= scope & ~seen
        seen |= nxt
        frontier = nxt
    return (seen & scope) == scope


cdef bint _edges_in_scope_c(u64* g, u64 scope) nogil:
    cdef u64 s = scope, b
    cdef int v
    while s:
        b = s & (~s + 1)
        v = ctz64(b)
        if g[v] & scope & ~b:
            return True
        s ^= b
    return False


cdef bint _hall_colors_edges_c(SearchState* st, u64 used_c, u64 scope, int need):
    # Kuhn matching of unused colors into distinct scope edges (small n only)
    cdef int n = st.n, m = st.m
    cdef int eu[300]
    cdef int ev[300]
    cdef int ne = 0
    cdef u64 s = scope, b, b2, t
    cdef int u, v, c, i, j, got
    while s:
        b = s & (~s + 1)
        u = ctz64(b)
        s ^= b
        t = scope & ~(((b << 1) - 1))
        while t:
            b2 = t & (~t + 1)
            v = ctz64(b2)
            eu[ne] = u
            ev[ne] = v
            ne += 1
            t ^= b2
    cdef int unused[64]
    cdef int nu = 0
    for c in range(m):
        if not (used_c >> c) & 1:
            unused[nu] = c
            nu += 1
    cdef int* match_e = <int*> malloc(ne * sizeof(int))
    cdef char* seen = <char*> malloc(ne)
    if match_e == NULL or seen == NULL:
        if match_e != NULL:
            free(match_e)
        if seen != NULL:
            free(seen)
        raise MemoryError()
    for j in range(ne):
        match_e[j] = -1
    got = 0
    for i in range(nu):
        memset(seen, 0, ne)
        if _try_aug(st, unused, match_e, seen, eu, ev, ne, i):
            got += 1
            if got >= need:
                break
    free(match_e)
    free(seen)
    return got >= need


cdef bint _try_aug(SearchState* st, int* unused, int* match_e, char* seen,
                   int* eu, int* ev, int ne, int i):
    cdef int j
    cdef u64* g = st.g[unused[i]]
    for j in range(ne):
        if not seen[j] and (g[eu[j]] >> ev[j]) & 1:
            seen[j] = 1
            if match_e[j] < 0 or _try_aug(st, unused, match_e, seen, eu, ev,
                                          ne, match_e[j]):
                match_e[j] = i
                return True
    return False


cdef bint _cycle_prune(SearchState* st, int u, u64 used_v, u64 used_c):
    cdef int n = st.n, m = st.m
    cdef u64 full = ((<u64>1) << n) - 1 if n < 64 else <u64>0 - 1
    cdef u64 scope = (full & ~used_v) | ((<u64>1) << u) | 1
    cdef u64 avail = full & ~used_v
    cdef u64 rows[64]
    cdef u64 scopebits, b, acc
    cdef int i, c, have, remaining
    scopebits = scope
    while scopebits:
        b = scopebits & (~scopebits + 1)
        i = ctz64(b)
        acc = 0
        for c in range(m):
            if not (used_c >> c) & 1:
                acc |= st.g[c][i]
        rows[i] = acc & scope
        scopebits ^= b
    scopebits = avail
    while scopebits:
        b = scopebits & (~scopebits + 1)
        if popcount64(rows[ctz64(b)]) < 2:
            return False
        scopebits ^= b
    if popcount64(rows[0]) < 1 or popcount64(rows[u]) < 1:
        return False
    if not _scope_connected_c(rows, scope, u):
        return False
    remaining = n - st.depth + 1
    have = 0
    for c in range(m):
        if not (used_c >> c) & 1 and _edges_in_scope_c(st.g[c], scope):
            have += 1
            if have >= remaining:
                break
    if have < remaining:
        return False
    if n <= 12:
        if not _hall_colors_edges_c(st, used_c, scope, remaining):
            return False
    return True


cdef bint _cycle_rec(SearchState* st, int u, u64 used_v, u64 used_c):
    cdef int n = st.n, m = st.m
    cdef u64 full = ((<u64>1) << n) - 1 if n < 64 else <u64>0 - 1
    cdef u64 avail
    cdef int v, c
    if st.depth == n:
        for c in range(m):
            if not (used_c >> c) & 1 and (st.g[c][u] >> 0) & 1:
                st.cols[st.depth - 1] = c
                return True
        return False
    if not _cycle_prune(st, u, used_v, used_c):
        return False
    avail = full & ~used_v
    for v in range(n):
        if not (avail >> v) & 1:
            continue
        for c in range(m):
            if (used_c >> c) & 1 or not (st.g[c][u] >> v) & 1:
                continue
            st.nodes += 1
            if st.nodes > st.budget:
                st.budget_hit = 1
                return False
            st.path[st.depth] = v
            st.cols[st.depth - 1] = c
            st.depth += 1
            if _cycle_rec(st, v, used_v | ((<u64>1) << v),
                          used_c | ((<u64>1) << c)):
                return True
            st.depth -= 1
            if st.budget_hit:
                return False
    return False


def find_transversal_cycle(int n, object masks, long long budget):
    cdef SearchState st
    cdef int m = len(masks)
    if n < 3 or m < n:
        return (0, None, None, 0)
    _load_masks(&st, n, masks)
    st.path[0] = 0
    st.depth = 1
    st.nodes = 0
    st.budget = budget
    st.budget_hit = 0
    cdef bint found = _cycle_rec(&st, 0, 1, 0)
    if st.budget_hit:
        return (-1, None, None, st.nodes)
    if found:
        return (1, [st.path[i] for i in range(n)],
                [st.cols[i] for i in range(n)], st.nodes)
    return (0, None, None, st.nodes)


cdef bint _path_prune(SearchState* st, int u, int t, u64 used_v, u64 used_c):
    cdef int n = st.n, m = st.m
    cdef u64 full = ((<u64>1) << n) - 1 if n < 64 else <u64>0 - 1
    cdef u64 scope = (full & ~used_v) | ((<u64>1) << u)
    cdef u64 avail = full & ~used_v & ~((<u64>1) << t)
    cdef u64 rows[64]
    cdef u64 scopebits, b, acc
    cdef int i, c, have, remaining
    scopebits = scope
    while scopebits:
        b = scopebits & (~scopebits + 1)
        i = ctz64(b)
        acc = 0
        for c in range(m):
            if not (used_c >> c) & 1:
                acc |= st.g[c][i]
        rows[i] = acc & scope
        scopebits ^= b
    scopebits = avail
    while scopebits:
        b = scopebits & (~scopebits + 1)
        if popcount64(rows[ctz64(b)]) < 2:
            return False
        scopebits ^= b
    if popcount64(rows[t]) < 1 or popcount64(rows[u]) < 1:
        return False
    if not _scope_connected_c(rows, scope, u):
        return False
    remaining = n - st.depth
    have = 0
    for c in range(m):
        if not (used_c >> c) & 1 and _edges_in_scope_c(st.g[c], scope):
            have += 1
            if have >= remaining:
                break
    if have < remaining:
        return False
    if n <= 12:
        if not _hall_colors_edges_c(st, used_c, scope, remaining):
            return False
    return True


cdef bint _path_rec(SearchState* st, int u, int t, u64 used_v, u64 used_c):
    cdef int n = st.n, m = st.m
    cdef u64 full = ((<u64>1) << n) - 1 if n < 64 else <u64>0 - 1
    cdef u64 avail
    cdef int v, c
    cdef bint last_step
    if st.depth == n:
        return u == t
    if not _path_prune(st, u, t, used_v, used_c):
        return False
    avail = full & ~used_v
    last_step = st.depth == n - 1
    for v in range(n):
        if not (avail >> v) & 1:
            continue
        if v == t and not last_step:
            continue
        for c in range(m):
            if (used_c >> c) & 1 or not (st.g[c][u] >> v) & 1:
                continue
            st.nodes += 1
            if st.nodes > st.budget:
                st.budget_hit = 1
                return False
            st.path[st.depth] = v
            st.cols[st.depth - 1] = c
            st.depth += 1
            if _path_rec(st, v, t, used_v | ((<u64>1) << v),
                         used_c | ((<u64>1) << c)):
                return True
            st.depth -= 1
            if st.budget_hit:
                return False
    return False


def find_transversal_path(int n, object masks, int s, int t, long long budget):
    cdef SearchState st
    cdef int m = len(masks)
    if n < 2 or m < n - 1 or s == t:
        return (0, None, None, 0)
    if not (0 <= s < n and 0 <= t < n):
        return (0, None, None, 0)
    _load_masks(&st, n, masks)
    st.path[0] = s
    st.depth = 1
    st.nodes = 0
    st.budget = budget
    st.budget_hit = 0
    cdef bint found = _path_rec(&st, s, t, (<u64>1) << s, 0)
    if st.budget_hit:
        return (-1, None, None, st.nodes)
    if found:
        return (1, [st.path[i] for i in range(n)],
                [st.cols[i] for i in range(n - 1)], st.nodes)
    return (0, None, None, st.nodes)


# ---------------------------------------------------------------------------
# counting (canonical cycles x permanent)

cdef long long _permanent_c(u64* rows, int n) nogil:
    cdef long long total = 0, prod
    cdef u64 s
    cdef int i, r, bits
    for s in range(1, (<u64>1) << n):
        prod = 1
        for i in range(n):
            r = popcount64(rows[i] & s)
            if r == 0:
                prod = 0
                break
            prod *= r
        if prod:
            bits = popcount64(s)
            if (n - bits) & 1:
                total -= prod
            else:
                total += prod
    return total


cdef struct CountState:
    int n
    int m
    u64 g[64][64]
    u64 union_[64]
    int path[65]
    int depth
    long long nodes
    long long budget
    int budget_hit
    long long count


cdef void _count_rec(CountState* st, int u, u64 used_v) nogil:
    cdef int n = st.n
    cdef u64 full = ((<u64>1) << n) - 1
    cdef u64 avail, erow
    cdef int v, c, i, a, b
    cdef u64 rows[64]
    if st.depth == n:
        if (st.union_[u] >> 0) & 1 and st.path[1] < st.path[n - 1]:
            for i in range(n):
                a = st.path[i]
                b = st.path[(i + 1) % n]
                erow = 0
                for c in range(st.m):
                    if (st.g[c][a] >> b) & 1:
                        erow |= (<u64>1) << c
                rows[i] = erow
            st.count += _permanent_c(rows, st.m)
        return
    avail = full & ~used_v
    for v in range(n):
        if not (avail >> v) & 1 or not (st.union_[u] >> v) & 1:
            continue
        st.nodes += 1
        if st.nodes > st.budget:
            st.budget_hit = 1
            return
        st.path[st.depth] = v
        st.depth += 1
        _count_rec(st, v, used_v | ((<u64>1) << v))
        st.depth -= 1
        if st.budget_hit:
            return


def count_transversals(int n, object masks, long long budget):
    cdef CountState st
    cdef int m = len(masks)
    cdef int c, v
    if m != n:
        raise ValueError("counting needs exactly n colors")
    if n < 3:
        return (0, 0, 0)
    if n > 20:
        raise ValueError("compiled count kernel caps n at 20")
    st.n = n
    st.m = m
    for c in range(m):
        row = masks[c]
        for v in range(n):
            st.g[c][v] = <u64> row[v]
    for v in range(n):
        st.union_[v] = 0
        for c in range(m):
            st.union_[v] |= st.g[c][v]
    st.path[0] = 0
    st.depth = 1
    st.nodes = 0
    st.budget = budget
    st.budget_hit = 0
    st.count = 0
    _count_rec(&st, 0, 1)
    if st.budget_hit:
        return (-1, 0, st.nodes)
    return (1, st.count, st.nodes)


# ---------------------------------------------------------------------------
# half-set scans (n <= 24)


cdef u64 _next_ksubset(u64 v) nogil:
    cdef u64 c = v & (~v + 1)
    cdef u64 r = v + c
    return (((r ^ v) >> 2) // c) | r


def graph_extremal_scan(int n, object rows_obj):
    cdef u64 rows[24]
    cdef int v, k, i
    cdef u64 a, top, b, amask, bmask
    cdef long long ins, cro, val, best = -1
    cdef u64 best_a = 0
    if n > 24:
        raise ValueError("scan kernels cap n at 24")
    for v in range(n):
        rows[v] = <u64> rows_obj[v]
    top = (<u64>1) << n
    cdef int ks[2]
    cdef int nks = 1
    ks[0] = n // 2
    if n % 2:
        ks[1] = (n + 1) // 2
        nks = 2
    for i in range(nks):
        k = ks[i]
        a = ((<u64>1) << k) - 1
        while a < top:
            amask = a
            bmask = (top - 1) & ~a
            ins = 0
            cro = 0
            b = a
            while b:
                v = ctz64(b & (~b + 1))
                ins += popcount64(rows[v] & amask)
                cro += popcount64(rows[v] & bmask)
                b ^= b & (~b + 1)
            ins //= 2
            val = ins if ins < cro else cro
            if best < 0 or val < best:
                best = val
                best_a = a
            a = _next_ksubset(a)
    return (best, best_a)


def family_extremal_scan(int n, object masks):
    cdef int m = len(masks)
    cdef u64* g = <u64*> malloc(m * n * sizeof(u64))
    cdef int v, c, k, i
    cdef u64 a, top, b, amask, bmask
    cdef long long ins, cro, tot, best = -1
    cdef u64 best_a = 0
    if g == NULL:
        raise MemoryError()
    if n > 24:
        free(g)
        raise ValueError("scan kernels cap n at 24")
    for c in range(m):
        row = masks[c]
        for v in range(n):
            g[c * n + v] = <u64> row[v]
    top = (<u64>1) << n
    cdef int ks[2]
    cdef int nks = 1
    ks[0] = n // 2
    if n % 2:
        ks[1] = (n + 1) // 2
        nks = 2
    for i in range(nks):
        k = ks[i]
        a = ((<u64>1) << k) - 1
        while a < top:
            amask = a
            bmask = (top - 1) & ~a
            tot = 0
            for c in range(m):
                ins = 0
                cro = 0
                b = a
                while b:
                    v = ctz64(b & (~b + 1))
                    ins += popcount64(g[c * n + v] & amask)
                    cro += popcount64(g[c * n + v] & bmask)
                    b ^= b & (~b + 1)
                ins //= 2
                tot += ins if ins < cro else cro
                if best >= 0 and tot >= best:
                    break
            if best < 0 or tot < best:
                best = tot
                best_a = a
            a = _next_ksubset(a)
    free(g)
    return (best, best_a)


def compute_r_scan(int n, object masks):
    cdef int m = len(masks)
    cdef u64* g = <u64*> malloc(m * n * sizeof(u64))
    cdef int v, c, k, i
    cdef u64 a, top, b, amask, bmask, cmask
    cdef long long ins, cro, d, ad, base, flip_cost
    cdef int flip_c
    cdef long long best = -1
    cdef u64 best_a = 0, best_c = 0
    if g == NULL:
        raise MemoryError()
    if n > 24 or m > 64:
        free(g)
        raise ValueError("scan kernels cap n at 24, m at 64")
    for c in range(m):
        row = masks[c]
        for v in range(n):
            g[c * n + v] = <u64> row[v]
    top = (<u64>1) << n
    cdef int ks[2]
    cdef int nks = 1
    ks[0] = n // 2
    if n % 2:
        ks[1] = (n + 1) // 2
        nks = 2
    for i in range(nks):
        k = ks[i]
        a = ((<u64>1) << k) - 1
        while a < top:
            amask = a
            bmask = (top - 1) & ~a
            base = 0
            cmask = 0
            flip_cost = -1
            flip_c = -1
            for c in range(m):
                ins = 0
                cro = 0
                b = amask
                while b:
                    v = ctz64(b & (~b + 1))
                    ins += popcount64(g[c * n + v] & amask)
                    cro += popcount64(g[c * n + v] & bmask)
                    b ^= b & (~b + 1)
                b = bmask
                while b:
                    v = ctz64(b & (~b + 1))
                    ins += popcount64(g[c * n + v] & bmask)
                    b ^= b & (~b + 1)
                ins //= 2  # both endpoint sums double count inside edges
                d = ins - cro
                if d < 0:
                    cmask |= (<u64>1) << c
                    base += ins
                else:
                    base += cro
                ad = -d if d < 0 else d
                if flip_cost < 0 or ad < flip_cost:
                    flip_cost = ad
                    flip_c = c
            if popcount64(cmask) % 2 == 0:
                base += flip_cost
                cmask ^= (<u64>1) << flip_c
            if best < 0 or base < best:
                best = base
                best_a = a
                best_c = cmask
            a = _next_ksubset(a)
    free(g)
    return (best, best_a, best_c)


def expansion_scan(int n, object rows_obj):
    cdef u64 rows[24]
    cdef int v, kb, i, j, ka
    cdef u64 bmask, top, amask
    cdef long long val, best = -1
    cdef u64 best_a = 0, best_b = 0
    cdef long long s[24]
    cdef int idx[24]
    cdef long long sv
    cdef int tmp
    if n > 24:
        raise ValueError("scan kernels cap n at 24")
    for v in range(n):
        rows[v] = <u64> rows_obj[v]
    top = (<u64>1) << n
    ka = n // 2 if n % 2 == 0 else (n - 1) // 2
    cdef int ks[2]
    cdef int nks = 1
    ks[0] = n // 2
    if n % 2:
        ks[1] = (n + 1) // 2
        nks = 2
    for i in range(nks):
        kb = ks[i]
        bmask = ((<u64>1) << kb) - 1
        while bmask < top:
            for v in range(n):
                s[v] = popcount64(rows[v] & bmask)
                idx[v] = v
            # insertion sort by (count, vertex): stable ascending
            for v in range(1, n):
                sv = s[v]
                tmp = idx[v]
                j = v - 1
                while j >= 0 and (s[j] > sv):
                    s[j + 1] = s[j]
                    idx[j + 1] = idx[j]
                    j -= 1
                s[j + 1] = sv
                idx[j + 1] = tmp
            val = 0
            amask = 0
            for v in range(ka):
                val += s[v]
                amask |= (<u64>1) << idx[v]
            if best < 0 or val < best:
                best = val
                best_a = amask
                best_b = bmask
            bmask = _next_ksubset(bmask)
    return (best, best_a, best_b)


# ---------------------------------------------------------------------------
# Hopcroft-Karp


def hk_matching(int n_left, int n_right, object adj):
    cdef int INF = n_left + n_right + 1
    cdef int* match_l = <int*> malloc(n_left * sizeof(int))
    cdef int* match_r = <int*> malloc(n_right * sizeof(int))
    cdef int* dist = <int*> malloc(n_left * sizeof(int))
    cdef int* q = <int*> malloc(n_left * sizeof(int))
    # flatten adjacency
    cdef int total = 0
    cdef int u, v, w, i
    for u in range(n_left):
        total += len(adj[u])
    cdef int* flat = <int*> malloc(total * sizeof(int)) if total else NULL
    cdef int* start = <int*> malloc((n_left + 1) * sizeof(int))
    if (match_l == NULL or match_r == NULL or dist == NULL or q == NULL
            or start == NULL or (total > 0 and flat == NULL)):
        raise MemoryError()
    i = 0
    start[0] = 0
    for u in range(n_left):
        row = adj[u]
        for v in row:
            flat[i] = v
            i += 1
        start[u + 1] = i
    for u in range(n_left):
        match_l[u] = -1
    for v in range(n_right):
        match_r[v] = -1

    cdef int qh, qt, j
    cdef bint reachable, found
    while True:
        qh = 0
        qt = 0
        for u in range(n_left):
            if match_l[u] < 0:
                dist[u] = 0
                q[qt] = u
                qt += 1
            else:
                dist[u] = INF
        reachable = False
        while qh < qt:
            u = q[qh]
            qh += 1
            for j in range(start[u], start[u + 1]):
                v = flat[j]
                w = match_r[v]
                if w < 0:
                    reachable = True
                elif dist[w] == INF:
                    dist[w] = dist[u] + 1
                    q[qt] = w
                    qt += 1
        if not reachable:
            break
        for u in range(n_left):
            if match_l[u] < 0:
                _hk_dfs(u, match_l, match_r, dist, flat, start, INF)
    out = [match_l[u] for u in range(n_left)]
    free(match_l)
    free(match_r)
    free(dist)
    free(q)
    if flat != NULL:
        free(flat)
    free(start)
    return out


cdef bint _hk_dfs(int u, int* match_l, int* match_r, int* dist,
                  int* flat, int* start, int INF):
    cdef int j, v, w
    for j in range(start[u], start[u + 1]):
        v = flat[j]
        w = match_r[v]
        if w < 0 or (dist[w] == dist[u] + 1 and
                     _hk_dfs(w, match_l, match_r, dist, flat, start, INF)):
            match_l[u] = v
            match_r[v] = u
            return True
    dist[u] = INF
    return False
