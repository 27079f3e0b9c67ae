"""Colored graph families and transversals.

A family is m graphs ("colors") on a shared vertex set {0..n-1}. Graphs are
stored as per-vertex neighbor bitmasks (arbitrary-precision ints), which keeps
an n=400 family with 400 colors around 10 MB and makes degree/edge-count
queries popcount-cheap. A plain graph is just a tuple of n bitmask rows; the
same helpers accept either.
"""

import json
from dataclasses import dataclass

from ._seeds import derive_seed, rng_for

# ---------------------------------------------------------------------------
# plain graphs (tuple of n neighbor bitmasks)


def graph_from_edges(n, edges):
    rows = [0] * n
    for u, v in edges:
        if u == v:
            raise ValueError(f"loop at {u}")
        if not (0 <= u < n and 0 <= v < n):
            raise ValueError(f"edge ({u},{v}) out of range for n={n}")
        rows[u] |= 1 << v
        rows[v] |= 1 << u
    return tuple(rows)


def graph_edges(adj):
    n = len(adj)
    out = []
    for u in range(n):
        row = adj[u] >> (u + 1)
        v = u + 1
        while row:
            if row & 1:
                out.append((u, v))
            row >>= 1
            v += 1
    return out


def graph_edge_count(adj):
    return sum(r.bit_count() for r in adj) // 2


def graph_min_degree(adj):
    return min(r.bit_count() for r in adj) if adj else 0


def complete_graph(n):
    full = (1 << n) - 1
    return tuple(full ^ (1 << v) for v in range(n))


def graph_complement(adj):
    n = len(adj)
    full = (1 << n) - 1
    return tuple((full ^ adj[v]) & ~(1 << v) for v in range(n))


def is_dirac_graph(adj):
    n = len(adj)
    need = (n + 1) // 2
    return all(r.bit_count() >= need for r in adj)


def random_graph(n, p, seed):
    rng = rng_for(seed, "gnp")
    rows = [0] * n
    for u in range(n):
        for v in range(u + 1, n):
            if rng.random() < p:
                rows[u] |= 1 << v
                rows[v] |= 1 << u
    return tuple(rows)


def dirac_repair(adj, seed):
    """Add edges to the lowest-degree vertices until min degree >= ceil(n/2).

    Each deficient vertex gets random missing edges; repair is monotone so it
    terminates. Used to condition G(n,p) samples into Dirac range.
    """
    n = len(adj)
    need = (n + 1) // 2
    rows = list(adj)
    rng = rng_for(seed, "repair")
    for v in range(n):
        while rows[v].bit_count() < need:
            missing = [u for u in range(n) if u != v and not (rows[v] >> u) & 1]
            u = rng.choice(missing)
            rows[v] |= 1 << u
            rows[u] |= 1 << v
    return tuple(rows)


def edge_minimal_reduction(adj, seed):
    """Strip a Dirac graph to an edge-minimal Dirac subgraph.

    One pass over a seeded-shuffled edge order, removing an edge exactly when
    both endpoints would stay strictly above the degree floor. A second pass
    can never find a removable edge: after the first, every edge touches a
    vertex at the floor.
    """
    n = len(adj)
    need = (n + 1) // 2
    if not is_dirac_graph(adj):
        raise ValueError("input graph is not Dirac")
    rows = list(adj)
    deg = [r.bit_count() for r in rows]
    edges = graph_edges(adj)
    rng = rng_for(seed, "edge-minimal")
    rng.shuffle(edges)
    for u, v in edges:
        if deg[u] > need and deg[v] > need:
            rows[u] &= ~(1 << v)
            rows[v] &= ~(1 << u)
            deg[u] -= 1
            deg[v] -= 1
    return tuple(rows)


# ---------------------------------------------------------------------------
# colored families


class ColoredFamily:
    """m graphs on {0..n-1}; masks[c][v] is the neighbor bitmask of v in G_c."""

    __slots__ = ("n", "m", "masks")

    def __init__(self, n, masks):
        self.n = n
        self.masks = tuple(tuple(g) for g in masks)
        self.m = len(self.masks)
        for g in self.masks:
            if len(g) != n:
                raise ValueError("each color needs one mask row per vertex")

    @classmethod
    def from_edges(cls, n, edge_lists):
        return cls(n, [graph_from_edges(n, es) for es in edge_lists])

    def graph(self, c):
        return self.masks[c]

    def degree(self, c, v):
        return self.masks[c][v].bit_count()

    def min_degree(self, c):
        return graph_min_degree(self.masks[c])

    def has_edge(self, c, u, v):
        return (self.masks[c][u] >> v) & 1 == 1

    def edge_colors(self, u, v):
        return [c for c in range(self.m) if (self.masks[c][u] >> v) & 1]

    def color_edges(self, c):
        return graph_edges(self.masks[c])

    def edge_count(self, c):
        return graph_edge_count(self.masks[c])

    def is_dirac(self):
        need = (self.n + 1) // 2
        return all(
            row.bit_count() >= need for g in self.masks for row in g
        )

    def subfamily(self, colors):
        return ColoredFamily(self.n, [self.masks[c] for c in colors])

    def induced(self, vertices):
        """Restrict every color to `vertices`, re-indexed by sorted position.

        Returns (family, order) where order[i] is the original label of the
        new vertex i.
        """
        order = sorted(vertices)
        pos = {v: i for i, v in enumerate(order)}
        k = len(order)
        out = []
        for g in self.masks:
            rows = [0] * k
            for i, v in enumerate(order):
                row = g[v]
                acc = 0
                for j, w in enumerate(order):
                    acc |= ((row >> w) & 1) << j
                rows[i] = acc
            out.append(tuple(rows))
        return ColoredFamily(k, out), order

    def to_json(self):
        colors = []
        for c in range(self.m):
            colors.append([[u, v] for u, v in self.color_edges(c)])
        doc = {"n": self.n, "m": self.m, "colors": colors}
        return json.dumps(doc, separators=(",", ":"))

    @classmethod
    def from_json(cls, text):
        doc = json.loads(text)
        if doc.get("m") != len(doc.get("colors", [])):
            raise ValueError("m does not match the number of color lists")
        return cls.from_edges(doc["n"], doc["colors"])

    def __eq__(self, other):
        return (
            isinstance(other, ColoredFamily)
            and self.n == other.n
            and self.masks == other.masks
        )

    def __repr__(self):
        return f"ColoredFamily(n={self.n}, m={self.m})"


# ---------------------------------------------------------------------------
# generators


def all_clique_family(n, m=None):
    """Every color the complete graph. The canonical dense non-extremal input."""
    if m is None:
        m = n
    row = complete_graph(n)
    return ColoredFamily(n, [row] * m)


def random_dirac_family(n, m, p, seed):
    """m independent G(n,p) samples repaired up to the Dirac degree floor."""
    masks = []
    for c in range(m):
        g = random_graph(n, p, derive_seed(seed, "color", c))
        masks.append(dirac_repair(g, derive_seed(seed, "repair", c)))
    return ColoredFamily(n, masks)


def bipartite_mask(n, side_a):
    """Neighbor rows of the complete bipartite graph on A vs its complement."""
    a_mask = 0
    for v in side_a:
        a_mask |= 1 << v
    full = (1 << n) - 1
    b_mask = full ^ a_mask
    return tuple(
        (b_mask if (a_mask >> v) & 1 else a_mask) & ~(1 << v) for v in range(n)
    )


def extremal_construction(n):
    """The tight example: n-1 bipartite colors plus one parity-blocking color.

    n must be even. Colors 0..n-2 are the complete bipartite graph between
    A = {0..n/2-1} and its complement; color n-1 is the two cliques on A and
    on the complement plus the perfect crossing matching {i, i+n/2}. Every
    color is Dirac, and the family has no transversal Hamilton cycle.
    """
    if n % 2:
        raise ValueError("extremal construction needs even n")
    half = n // 2
    side_a = list(range(half))
    bip = bipartite_mask(n, side_a)
    last = [0] * n
    for v in range(n):
        block = range(half) if v < half else range(half, n)
        for u in block:
            if u != v:
                last[v] |= 1 << u
    for i in range(half):
        last[i] |= 1 << (i + half)
        last[i + half] |= 1 << i
    return ColoredFamily(n, [bip] * (n - 1) + [tuple(last)])


def two_clique_family(n, m=None):
    """Every color = two cliques joined by the same perfect crossing matching.

    n must be even; degree is exactly n/2 so the family is tight Dirac. No
    color is close to bipartite, which routes cleanup to the clique case.
    """
    if n % 2:
        raise ValueError("two-clique family needs even n")
    if m is None:
        m = n
    half = n // 2
    rows = [0] * n
    for v in range(n):
        block = range(half) if v < half else range(half, n)
        for u in block:
            if u != v:
                rows[v] |= 1 << u
    for i in range(half):
        rows[i] |= 1 << (i + half)
        rows[i + half] |= 1 << i
    row = tuple(rows)
    return ColoredFamily(n, [row] * m)


def noisy_bipartite_family(n, m, inside_per_color, seed, forced_inside=None):
    """Complete bipartite colors with a few random inside edges added.

    Stays (1-eps)-bipartite for small noise but gives the cleanup phase real
    inside edges to work with. With odd n the bipartite graph alone is not
    Dirac, so pass inside_per_color large enough to cover the short side
    (a near-perfect inside matching is added first in that case).
    """
    half = n // 2
    side_a = list(range(half))
    base = bipartite_mask(n, side_a)
    rng = rng_for(seed, "noisy-bip")
    b_side = list(range(half, n))
    masks = []
    for c in range(m):
        rows = list(base)

        def add(u, v):
            rows[u] |= 1 << v
            rows[v] |= 1 << u

        added = 0
        if n % 2:
            # odd n: the big side is one short of the Dirac floor
            order = b_side[:]
            rng.shuffle(order)
            for i in range(0, len(order) - 1, 2):
                add(order[i], order[i + 1])
                added += 1
            if len(order) % 2:
                add(order[-1], order[0])
                added += 1
        if forced_inside:
            for u, v in forced_inside:
                if not (rows[u] >> v) & 1:
                    add(u, v)
                    added += 1
        while added < inside_per_color:
            side = side_a if rng.random() < 0.5 else b_side
            u, v = rng.sample(side, 2)
            if not (rows[u] >> v) & 1:
                add(u, v)
                added += 1
        masks.append(tuple(rows))
    return ColoredFamily(n, masks)


# ---------------------------------------------------------------------------
# transversals


@dataclass
class Transversal:
    """A rainbow cycle or path: vertex order plus one color per edge.

    colors[i] colors the edge order[i]-order[i+1]; for a cycle the last entry
    colors the wrap-around edge.
    """

    kind: str
    order: tuple
    colors: tuple

    def edges(self):
        k = len(self.order)
        if self.kind == "cycle":
            return [
                (self.order[i], self.order[(i + 1) % k]) for i in range(k)
            ]
        return [(self.order[i], self.order[i + 1]) for i in range(k - 1)]

    def phi(self):
        out = {}
        for (u, v), c in zip(self.edges(), self.colors):
            key = (u, v) if u < v else (v, u)
            out[key] = c
        return out

    def to_json(self):
        phi = {f"{u}-{v}": c for (u, v), c in sorted(self.phi().items())}
        doc = {self.kind: list(self.order), "phi": phi}
        return json.dumps(doc, separators=(",", ":"))

    @classmethod
    def from_json(cls, text):
        doc = json.loads(text)
        kind = "cycle" if "cycle" in doc else "path"
        order = tuple(doc[kind])
        phi = {}
        for key, c in doc["phi"].items():
            u, v = key.split("-")
            phi[(int(u), int(v))] = c
        k = len(order)
        edges = (
            [(order[i], order[(i + 1) % k]) for i in range(k)]
            if kind == "cycle"
            else [(order[i], order[i + 1]) for i in range(k - 1)]
        )
        colors = []
        for u, v in edges:
            key = (u, v) if u < v else (v, u)
            colors.append(phi[key])
        return cls(kind, order, tuple(colors))


def validate_transversal(family, t, spanning=True):
    """Return a list of violation strings (empty means valid).

    A valid transversal cycle visits distinct vertices, uses pairwise
    distinct colors, and every edge belongs to the graph of its color. With
    spanning=True a cycle must hit all n vertices; a path must use n vertices
    and n-1 distinct colors.
    """
    bad = []
    order, colors = t.order, t.colors
    if t.kind not in ("cycle", "path"):
        return [f"unknown kind {t.kind!r}"]
    if len(set(order)) != len(order):
        bad.append("repeated vertex")
    if any(not (0 <= v < family.n) for v in order):
        bad.append("vertex out of range")
    expect_edges = len(order) if t.kind == "cycle" else len(order) - 1
    if len(colors) != expect_edges:
        bad.append(
            f"{len(colors)} colors for {expect_edges} edges"
        )
        return bad
    if t.kind == "cycle" and len(order) < 3:
        bad.append("cycle shorter than a triangle")
    if len(set(colors)) != len(colors):
        bad.append("repeated color")
    if any(not (0 <= c < family.m) for c in colors):
        bad.append("color out of range")
        return bad
    for (u, v), c in zip(t.edges(), colors):
        if u == v or not family.has_edge(c, u, v):
            bad.append(f"edge {u}-{v} missing from color {c}")
    if spanning and len(order) != family.n:
        bad.append(f"covers {len(order)} of {family.n} vertices")
    return bad
