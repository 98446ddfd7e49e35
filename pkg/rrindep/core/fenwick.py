"""
Binary indexed (Fenwick) tree over ranks, carrying a count and a weight sum
"""
from typing import List, Tuple


class WeightedFenwickTree:
    """
    Prefix counts and prefix weight sums over positions 0..size-1.

    Both `add` and `prefix` take O(log size) time. Storage is two plain
    Python lists, which index faster than numpy arrays element by element.
    """

    def __init__(self, size: int) -> None:
        if size <= 0:
            raise ValueError("size must be positive")
        self.size = size
        self._count: List[int] = [0] * (size + 1)
        self._weight: List[float] = [0.0] * (size + 1)
        self.total_count = 0
        self.total_weight = 0.0

    def add(self, index: int, weight: float) -> None:
        """Insert one element of the given weight at position `index`."""
        if not 0 <= index < self.size:
            raise IndexError("index out of bounds")
        self.total_count += 1
        self.total_weight += weight
        i = index + 1
        count, tree = self._count, self._weight
        while i <= self.size:
            count[i] += 1
            tree[i] += weight
            i += i & -i

    def prefix(self, index: int) -> Tuple[int, float]:
        """(count, weight sum) of the elements at positions 0..index, inclusive."""
        if not -1 <= index < self.size:
            raise IndexError("index out of bounds")
        i = index + 1
        c = 0
        w = 0.0
        count, tree = self._count, self._weight
        while i > 0:
            c += count[i]
            w += tree[i]
            i &= i - 1
        return c, w
