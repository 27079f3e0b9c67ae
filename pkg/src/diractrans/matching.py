"""Bipartite maximum matching, wrapping the backend Hopcroft-Karp kernel."""

from . import backend


def max_bipartite_matching(n_left, n_right, adj):
    """Maximum matching of a bipartite graph given left adjacency lists.

    Returns (size, pairs) with pairs as (left, right) index tuples. The
    kernel is deterministic given the input order; neighbor lists are
    sorted here so callers need not worry about it.
    """
    rows = [sorted(set(a)) for a in adj]
    for i, row in enumerate(rows):
        if row and (row[0] < 0 or row[-1] >= n_right):
            raise ValueError(f"neighbor of {i} out of range")
    match_l = backend.hk_matching(n_left, n_right, rows)
    pairs = [(u, v) for u, v in enumerate(match_l) if v >= 0]
    return len(pairs), pairs


def has_perfect_matching(n_left, n_right, adj):
    size, _ = max_bipartite_matching(n_left, n_right, adj)
    return size == min(n_left, n_right)
