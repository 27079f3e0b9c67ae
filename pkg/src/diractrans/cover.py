"""Path covers that push one vortex level down onto the next block.

A cover_down call converts a vertex block U, a color block C, and an
inherited matching M of virtual edges into vertex-disjoint paths whose
interiors cover U, whose endpoints land in the next block V, and whose
non-virtual edges form a rainbow using every color of C exactly once.
Counting forces the number of paths: a path with p interior vertices
carries p + 1 colored-or-virtual edges, so summing over paths gives
|C| + |M| = |U| + |paths|, i.e. exactly b = |C| + |M| - |U| paths.

Two constructions, picked by the size of b:

* staged: the sequential-partition construction. U is split into k parts
  of size roughly s; whenever a fresh vertex has an M-partner, the partner
  is seated in the next part, so every virtual edge spans consecutive
  parts and rides along for free. Rounds of rainbow matchings thread
  chains left to right through the first k-1 parts, the last part stays
  behind as length-0 paths, every chain end is matched into V with a
  fresh color and a fresh vertex, and leftover colors close out as a
  transversal matching inside V.
* merge: for small b, where parts of size >= 4 do not fit. Virtual edges
  and uncovered vertices start as one-segment paths; random endpoint
  pairs are merged through unused-color edges until at most b segments
  survive, and the ends are closed into V as above. The color accounting
  is exact, so at most b - |segments| colors remain for the V-matching.

Both modes finish by validating their own output.
"""

from dataclasses import dataclass, field

from ._seeds import derive_seed, rng_for
from .rainbow import RainbowMatchingSampler, rainbow_transversal_matching


class CoverDownError(RuntimeError):
    """Retries exhausted; .tallies counts which stage kept failing."""

    def __init__(self, message, tallies=None):
        super().__init__(message)
        self.tallies = dict(tallies or {})


class _AttemptFailed(Exception):
    def __init__(self, stage):
        super().__init__(stage)
        self.stage = stage


@dataclass
class PathCover:
    """Vertex-disjoint paths covering a block, with the frame they serve.

    paths are vertex tuples in order; coloring maps normalized non-virtual
    edges to colors; matching lists the virtual edges, which appear inside
    paths but are never colored.
    """

    paths: tuple
    coloring: dict
    u_block: tuple
    v_block: tuple
    matching: tuple
    colors: tuple
    meta: dict = field(default_factory=dict)

    def endpoint_pairs(self):
        """The (first, last) vertex of every path, in path order."""
        return tuple((p[0], p[-1]) for p in self.paths)


def _norm(u, v):
    return (u, v) if u < v else (v, u)


def validate_path_cover(pc, family):
    """Every invariant, as a list of violation strings (empty = valid)."""
    out = []
    u_set = set(pc.u_block)
    v_set = set(pc.v_block)
    m_set = {_norm(*e) for e in pc.matching}

    seen = set()
    for p in pc.paths:
        if len(p) < 2:
            out.append(f"path {p} too short")
            continue
        for x in p:
            if x in seen:
                out.append(f"paths not disjoint: vertex {x} reused")
            seen.add(x)
        for x in (p[0], p[-1]):
            if x not in v_set:
                out.append(f"endpoint {x} outside V")
        for x in p[1:-1]:
            if x not in u_set:
                out.append(f"interior {x} outside U")

    missing = u_set - seen
    if missing:
        out.append(f"{len(missing)} vertices of U uncovered")

    path_edges = set()
    for p in pc.paths:
        for a, b in zip(p, p[1:]):
            if a == b:
                out.append(f"degenerate edge at {a}")
            path_edges.add(_norm(a, b))

    for e in m_set:
        if e not in path_edges:
            out.append(f"virtual edge {e} not spanned by any path")
        if e in pc.coloring:
            out.append(f"virtual edge {e} colored")

    for e in path_edges - m_set:
        if e not in pc.coloring:
            out.append(f"edge {e} uncolored")
    for e in pc.coloring:
        if e not in path_edges:
            out.append(f"colored edge {e} not on any path")

    block = set(pc.colors)
    used = {}
    for e, c in pc.coloring.items():
        if c not in block:
            out.append(f"color {c} outside the block")
        if c in used:
            out.append(f"color {c} used twice")
        used[c] = e
        if (e in path_edges and 0 <= c < family.m
                and not family.has_edge(c, e[0], e[1])):
            out.append(f"edge {e} missing from color {c}")
    for c in block - used.keys():
        out.append(f"color {c} unused")

    want = len(pc.colors) + len(pc.matching) - len(pc.u_block)
    if len(pc.paths) != want:
        out.append(f"path count {len(pc.paths)} != |C|+|M|-|U| = {want}")
    return out


def check_cover_preconditions(family, u_block, v_block, matching, colors,
                              params):
    """Named violations of the cover_down contract (empty = admissible)."""
    beta = params.get("beta", 0.4)
    gamma = params.get("gamma", 0.35)
    eps = params.get("eps", 0.1)
    cap_hi = params.get("cap_hi", 0.25)
    out = []

    u = list(u_block)
    v = list(v_block)
    if len(set(u)) != len(u):
        out.append("duplicate vertices in U")
    if len(set(v)) != len(v):
        out.append("duplicate vertices in V")
    if set(u) & set(v):
        out.append("U and V overlap")
    for x in u + v:
        if not 0 <= x < family.n:
            out.append(f"vertex {x} out of range")
            return out

    u_set = set(u)
    m_verts = set()
    for e in matching:
        if len(e) != 2 or e[0] == e[1]:
            out.append(f"degenerate matching edge {tuple(e)}")
            continue
        for x in e:
            if x not in u_set:
                out.append(f"matching vertex {x} outside U")
            if x in m_verts:
                out.append("matching not vertex-disjoint")
            m_verts.add(x)
    if len(matching) > gamma * len(u):
        out.append(
            f"matching size {len(matching)} exceeds gamma share "
            f"{gamma * len(u):.1f} of U"
        )

    cs = list(colors)
    if len(set(cs)) != len(cs):
        out.append("duplicate colors")
    for c in cs:
        if not 0 <= c < family.m:
            out.append(f"color {c} out of range")
            return out

    b = len(cs) + len(matching) - len(u)
    lo = beta**6 * len(u)
    if b < lo:
        out.append(f"color balance {b} below beta^6 |U| = {lo:.2f}")
    if b > cap_hi * len(v):
        out.append(
            f"color balance {b} above cap_hi |V| = {cap_hi * len(v):.1f}"
        )
    if 2 * b > len(v):
        out.append(f"color balance {b} needs 2b <= |V| = {len(v)}")

    if not params.get("relax_ratio", False):
        rlo = (1 - beta) * beta * len(u)
        rhi = (1 + beta) * beta * len(u)
        if not rlo <= len(v) <= rhi:
            out.append(
                f"next block size {len(v)} outside window "
                f"[{rlo:.1f}, {rhi:.1f}]"
            )

    if out:
        return out

    # degree floor into both blocks, every color, every vertex of U u V
    umask = 0
    for x in u:
        umask |= 1 << x
    vmask = 0
    for x in v:
        vmask |= 1 << x
    floor_u = (0.5 - eps) * len(u)
    floor_v = (0.5 - eps) * len(v)
    for c in cs:
        g = family.masks[c]
        for x in u + v:
            if (g[x] & umask).bit_count() < floor_u:
                out.append(f"vertex {x} low color-{c} degree into U")
            elif (g[x] & vmask).bit_count() < floor_v:
                out.append(f"vertex {x} low color-{c} degree into V")
            if len(out) > 20:
                out.append("... degree check truncated")
                return out
    return out


def cover_down(family, u_block, v_block, matching, colors, params, seed,
               staged_retries=10, merge_retries=12):
    """Cover U by b = |C|+|M|-|U| paths with endpoints in V.

    Preconditions raise ValueError with the named violations. Construction
    failures retry with fresh randomness; staged mode falls back to merge
    mode before giving up with CoverDownError.
    """
    bad = check_cover_preconditions(
        family, u_block, v_block, matching, colors, params
    )
    if bad:
        raise ValueError("cover-down preconditions: " + "; ".join(bad))

    u = sorted(u_block)
    v = sorted(v_block)
    cs = sorted(colors)
    m_edges = tuple(_norm(*e) for e in matching)
    b = len(cs) + len(m_edges) - len(u)
    eps = params.get("eps", 0.1)

    s = max(4, (b - 6) // 2)
    staged_ok = b >= 14 and len(u) >= 3 * s

    tallies = {}
    for mode, retries in (("staged", staged_retries if staged_ok else 0),
                          ("merge", merge_retries)):
        builder = _staged_attempt if mode == "staged" else _merge_attempt
        for attempt in range(retries):
            try:
                chains, coloring, virt_used = builder(
                    family, u, v, m_edges, cs, b, s, eps, seed, attempt
                )
            except _AttemptFailed as exc:
                key = f"{mode}:{exc.stage}"
                tallies[key] = tallies.get(key, 0) + 1
                continue
            pc = PathCover(
                paths=tuple(tuple(ch) for ch in chains),
                coloring=coloring,
                u_block=tuple(u),
                v_block=tuple(v),
                matching=m_edges,
                colors=tuple(cs),
                meta={
                    "mode": mode,
                    "attempt": attempt,
                    "budget": b,
                    "part_size": s if mode == "staged" else None,
                    "cap_hi": params.get("cap_hi", 0.25),
                    "relax_ratio": bool(params.get("relax_ratio", False)),
                    "tallies": dict(tallies),
                },
            )
            flaws = validate_path_cover(pc, family)
            if flaws:
                key = f"{mode}:self-check"
                tallies[key] = tallies.get(key, 0) + 1
                continue
            pc.meta["c_dd"] = virt_used
            return pc
    raise CoverDownError(
        f"cover-down retries exhausted (budget {b})", tallies
    )


# ---------------------------------------------------------------- staged


def _partition_u(u, partner, k, s, rng):
    """Split U into k parts, seating M-partners in the following part."""
    pool = list(u)
    rng.shuffle(pool)
    parts = [[] for _ in range(k)]
    where = {}
    held = {}
    ptr = 0
    for i in range(k):
        for w in [w for w, pi in held.items() if pi == i]:
            parts[i].append(w)
            where[w] = i
            del held[w]
        last = i == k - 1
        while ptr < len(pool) and (last or len(parts[i]) < s):
            w0 = pool[ptr]
            ptr += 1
            if w0 in where or w0 in held:
                continue
            parts[i].append(w0)
            where[w0] = i
            pw = partner.get(w0)
            if pw is not None and pw not in where and pw not in held:
                if last:
                    parts[i].append(pw)
                    where[pw] = i
                else:
                    held[pw] = i + 1
    return parts, where


def _staged_attempt(family, u, v, m_edges, cs, b, s, eps, seed, attempt):
    rng = rng_for(seed, "cover-staged", attempt)
    partner = {}
    for x, y in m_edges:
        partner[x] = y
        partner[y] = x

    k = len(u) // s
    parts, where = _partition_u(u, partner, k, s, rng)

    # fresh vertices of the last part become length-0 paths (pairs count 1)
    carried_last = {w for w in parts[-1] if partner.get(w) in where
                    and where.get(partner.get(w)) == k - 2}
    fresh_last = [w for w in parts[-1] if w not in carried_last]
    pairs_last = sum(
        1 for w in fresh_last
        if partner.get(w) in fresh_last and w < partner[w]
    )
    singles_proj = len(fresh_last) - pairs_last
    if len(parts[0]) + singles_proj > b:
        raise _AttemptFailed("partition over budget")

    chains = [[w] for w in parts[0]]
    end_cid = {w: i for i, w in enumerate(parts[0])}
    in_chain = set(parts[0])
    unused = set(cs)
    coloring = {}

    for i in range(k - 1):
        nxt = set(parts[i + 1])
        for w in list(parts[i]):
            cid = end_cid.get(w)
            if cid is None:
                continue
            pw = partner.get(w)
            if pw is not None and pw in nxt and pw not in in_chain:
                chains[cid].append(pw)
                in_chain.add(pw)
                del end_cid[w]
                end_cid[pw] = cid

        if i > k - 3:
            continue
        left = [w for w in parts[i] if w in end_cid]
        right = [w for w in parts[i + 1] if w not in in_chain]
        t = min(len(left), len(right))
        extras = []
        if len(left) > t:
            rng.shuffle(left)
            left = left[:t]
        if len(right) > t:
            rng.shuffle(right)
            extras = right[t:]
            right = right[:t]
        if t > 0:
            if len(unused) < 2 * t:
                raise _AttemptFailed("colors exhausted mid-round")
            round_colors = rng.sample(sorted(unused), 2 * t)
            slack = b - (len(chains) + singles_proj)
            sampler = RainbowMatchingSampler(
                family, left, right, round_colors, eps
            )
            try:
                matched, _ = sampler.sample_matching(
                    derive_seed(seed, "cover-round", attempt, i),
                    retries=20,
                    min_size=max(0, t - max(0, slack)),
                )
            except RuntimeError:
                raise _AttemptFailed("round matching stuck")
            got = set()
            for a, w, c in matched:
                cid = end_cid.pop(a)
                chains[cid].append(w)
                end_cid[w] = cid
                in_chain.add(w)
                coloring[_norm(a, w)] = c
                unused.discard(c)
                got.add(w)
            extras += [w for w in right if w not in got]
        for w in extras:
            end_cid[w] = len(chains)
            chains.append([w])
            in_chain.add(w)
        if len(chains) + singles_proj > b:
            raise _AttemptFailed("round over budget")

    for w in parts[-1]:
        if w in in_chain:
            continue
        pw = partner.get(w)
        if pw is not None and where.get(pw) == k - 1 and pw not in in_chain:
            end_cid[pw] = len(chains)
            chains.append([w, pw])
            in_chain.update((w, pw))
        else:
            end_cid[w] = len(chains)
            chains.append([w])
            in_chain.add(w)
    if len(chains) > b:
        raise _AttemptFailed("too many chains")

    return _finish(family, chains, v, unused, coloring, b, seed, attempt)


# ----------------------------------------------------------------- merge


def _merge_attempt(family, u, v, m_edges, cs, b, s, eps, seed, attempt):
    rng = rng_for(seed, "cover-merge", attempt)
    covered = {x for e in m_edges for x in e}
    segments = [list(e) for e in m_edges]
    segments += [[x] for x in u if x not in covered]
    pool = sorted(cs)
    coloring = {}

    while len(segments) > b:
        done = False
        for _ in range(400):
            c = pool[rng.randrange(len(pool))]
            i, j = rng.sample(range(len(segments)), 2)
            a = segments[i][0] if rng.random() < 0.5 else segments[i][-1]
            d = segments[j][0] if rng.random() < 0.5 else segments[j][-1]
            if family.has_edge(c, a, d):
                si = segments[i] if segments[i][-1] == a else segments[i][::-1]
                sj = segments[j] if segments[j][0] == d else segments[j][::-1]
                hi, lo = max(i, j), min(i, j)
                del segments[hi]
                del segments[lo]
                segments.append(si + sj)
                coloring[_norm(a, d)] = c
                pool.remove(c)
                done = True
                break
        if not done:
            done = _merge_exhaustive(family, segments, pool, coloring, rng)
        if not done:
            raise _AttemptFailed("merge stuck")

    return _finish(family, segments, v, pool, coloring, b, seed, attempt)


def _merge_exhaustive(family, segments, pool, coloring, rng):
    """Scan every unused color for any cross-segment end-end edge."""
    ends = []
    emask = {}
    for idx, seg in enumerate(segments):
        ends.append((seg[0], idx))
        emask[seg[0]] = idx
        if seg[-1] != seg[0]:
            ends.append((seg[-1], idx))
            emask[seg[-1]] = idx
    allmask = 0
    for x in emask:
        allmask |= 1 << x
    for c in list(pool):
        rows = family.masks[c]
        for x, idx in ends:
            hits = rows[x] & allmask
            while hits:
                low = hits & -hits
                hits ^= low
                y = low.bit_length() - 1
                if emask.get(y, idx) == idx:
                    continue
                jdx = emask[y]
                si = segments[idx] if segments[idx][-1] == x \
                    else segments[idx][::-1]
                sj = segments[jdx] if segments[jdx][0] == y \
                    else segments[jdx][::-1]
                hi2, lo2 = max(idx, jdx), min(idx, jdx)
                del segments[hi2]
                del segments[lo2]
                segments.append(si + sj)
                coloring[_norm(x, y)] = c
                pool.remove(c)
                return True
    return False


# ------------------------------------------------------- shared closing


def _finish(family, chains, v, unused, coloring, b, seed, attempt):
    """Close every chain into V, then spend leftover colors inside V."""
    rng = rng_for(seed, "cover-ends", attempt)
    ends = [(cid, side) for cid in range(len(chains)) for side in (0, 1)]
    rng.shuffle(ends)
    v_free = sorted(v)
    pool = sorted(unused)
    closures = {}
    for cid, side in ends:
        ch = chains[cid]
        x = ch[0] if side == 0 else ch[-1]
        got = None
        for _ in range(300):
            c = pool[rng.randrange(len(pool))]
            vv = v_free[rng.randrange(len(v_free))]
            if family.has_edge(c, x, vv):
                got = (c, vv)
                break
        if got is None:
            for c in pool:
                row = family.masks[c][x]
                cands = [vv for vv in v_free if (row >> vv) & 1]
                if cands:
                    got = (c, cands[rng.randrange(len(cands))])
                    break
        if got is None:
            raise _AttemptFailed("end matching stuck")
        c, vv = got
        pool.remove(c)
        v_free.remove(vv)
        closures[(cid, side)] = (vv, c)

    paths = []
    for cid, ch in enumerate(chains):
        v0, c0 = closures[(cid, 0)]
        v1, c1 = closures[(cid, 1)]
        coloring[_norm(v0, ch[0])] = c0
        coloring[_norm(ch[-1], v1)] = c1
        paths.append([v0] + ch + [v1])

    if pool:
        extra = rainbow_transversal_matching(
            family, v_free, pool,
            derive_seed(seed, "cover-cdd", attempt),
        )
        for c, (x, y) in extra.items():
            coloring[_norm(x, y)] = c
            paths.append([x, y])
    return paths, coloring, len(pool)
