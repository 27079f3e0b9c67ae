import random

import pytest

from diractrans.matching import has_perfect_matching, max_bipartite_matching

from oracles import oracle_max_matching_size


def test_matches_oracle_on_100_random_instances():
    for t in range(100):
        rng = random.Random(3000 + t)
        nl = rng.randint(1, 9)
        nr = rng.randint(1, 9)
        adj = [
            [v for v in range(nr) if rng.random() < 0.4] for _ in range(nl)
        ]
        size, pairs = max_bipartite_matching(nl, nr, adj)
        assert size == oracle_max_matching_size(nl, nr, adj)
        # pairs must form a matching inside the graph
        assert len({u for u, _ in pairs}) == len(pairs)
        assert len({v for _, v in pairs}) == len(pairs)
        for u, v in pairs:
            assert v in adj[u]


def test_neighbor_range_check():
    with pytest.raises(ValueError):
        max_bipartite_matching(2, 2, [[0], [2]])


def test_perfect_matching_helper():
    assert has_perfect_matching(3, 3, [[0, 1], [1, 2], [0, 2]])
    assert not has_perfect_matching(3, 3, [[0], [0], [0]])
