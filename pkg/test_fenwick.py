import random

import pytest

from rrindep.core.fenwick import WeightedFenwickTree


def test_prefix_matches_running_lists():
    rng = random.Random(4)
    tree = WeightedFenwickTree(17)
    counts = [0] * 17
    weights = [0.0] * 17
    for _ in range(200):
        index = rng.randrange(17)
        weight = rng.random()
        tree.add(index, weight)
        counts[index] += 1
        weights[index] += weight
        query = rng.randrange(-1, 17)
        c, w = tree.prefix(query)
        assert c == sum(counts[: query + 1])
        assert w == pytest.approx(sum(weights[: query + 1]))
    assert tree.total_count == 200
    assert tree.total_weight == pytest.approx(sum(weights))


def test_bounds():
    tree = WeightedFenwickTree(3)
    assert tree.prefix(-1) == (0, 0.0)
    with pytest.raises(IndexError):
        tree.add(3, 1.0)
    with pytest.raises(IndexError):
        tree.prefix(3)
    with pytest.raises(ValueError):
        WeightedFenwickTree(0)
