"""
Sum Tree
--------
Array-backed binary tree of non-negative weights supporting O(log n) point
updates and weighted selection by prefix sum. Drives the Wallenius sampler,
where every draw changes exactly one dyad's weight.
"""

import numpy as np


class SumTree:
    """
    Leaves hold the weights, every internal node the sum of its two children.
    Node 1 is the root; node k has children 2k and 2k + 1.
    """

    def __init__(self, weights):
        weights = np.asarray(weights, dtype=float).reshape(-1)
        if (weights < 0).any():
            raise ValueError("SumTree weights must be non-negative")
        self._size = len(weights)
        capacity = 1
        while capacity < max(self._size, 1):
            capacity <<= 1
        self._capacity = capacity
        self._tree = np.zeros(2 * capacity)
        self._tree[capacity:capacity + self._size] = weights

        level = capacity
        while level > 1:
            half = level >> 1
            self._tree[half:level] = self._tree[level:2 * level:2] + self._tree[level + 1:2 * level:2]
            level = half

    def __len__(self) -> int:
        return self._size

    @property
    def total(self) -> float:
        return float(self._tree[1])

    def __getitem__(self, idx: int) -> float:
        return float(self._tree[self._capacity + idx])

    def __setitem__(self, idx: int, value: float):
        node = self._capacity + idx
        tree = self._tree
        tree[node] = value
        node >>= 1
        while node >= 1:
            tree[node] = tree[node << 1] + tree[(node << 1) | 1]
            node >>= 1

    def find_prefixsum_idx(self, prefixsum: float) -> int:
        """
        Index i of the leaf where the running sum of weights first exceeds prefixsum.

        Never returns a zero-weight leaf: when rounding points into an empty
        right subtree the search stays left.
        """
        tree = self._tree
        node = 1
        while node < self._capacity:
            left = node << 1
            left_sum = tree[left]
            if left_sum > prefixsum or tree[left | 1] <= 0.0:
                node = left
            else:
                prefixsum -= left_sum
                node = left | 1
        return node - self._capacity
