"""Exact k-nearest-neighbour search over a static point set.

Binary space partition with maximum-spread split dimension, median split,
and bucketed leaves. Queries return exactly the k nearest points with ties
at equal distance broken by the lower point index, matching a brute-force
scan ordered by (distance, index).
"""

import heapq

import numpy as np

from .validation import as_feature_matrix, as_query_vector

__all__ = ["KdTree"]

_LEAF = -1


class KdTree:
    """Static k-d tree over an (n, d) point matrix.

    Parameters
    ----------
    points : array_like, shape (n, d)
    leaf_size : int, default 16
        Maximum bucket size; nodes at or below it are not split. Nodes
        whose points are all identical are kept as leaves regardless.
    """

    def __init__(self, points, leaf_size=16):
        self._pts = as_feature_matrix(points, name="points")
        leaf_size = int(leaf_size)
        if leaf_size < 1:
            raise ValueError(f"leaf_size must be positive, got {leaf_size}")
        self.leaf_size = leaf_size
        n = self._pts.shape[0]
        self._idx = np.arange(n, dtype=np.int64)
        # parallel node arrays; split_dim == _LEAF marks a leaf over idx[start:end]
        self._split_dim = []
        self._split_val = []
        self._left = []
        self._right = []
        self._start = []
        self._end = []
        self._build(0, n)
        self._split_dim = np.asarray(self._split_dim, dtype=np.int64)
        self._split_val = np.asarray(self._split_val, dtype=np.float64)
        self._left = np.asarray(self._left, dtype=np.int64)
        self._right = np.asarray(self._right, dtype=np.int64)
        self._start = np.asarray(self._start, dtype=np.int64)
        self._end = np.asarray(self._end, dtype=np.int64)

    @property
    def n(self):
        return self._pts.shape[0]

    @property
    def d(self):
        return self._pts.shape[1]

    def _new_node(self):
        self._split_dim.append(_LEAF)
        self._split_val.append(0.0)
        self._left.append(-1)
        self._right.append(-1)
        self._start.append(0)
        self._end.append(0)
        return len(self._split_dim) - 1

    def _build(self, start, end):
        node = self._new_node()
        count = end - start
        sub = self._idx[start:end]
        if count <= self.leaf_size:
            self._start[node] = start
            self._end[node] = end
            return node
        block = self._pts[sub]
        spread = block.max(axis=0) - block.min(axis=0)
        dim = int(np.argmax(spread))
        if spread[dim] == 0.0:
            # all points identical; splitting cannot make progress
            self._start[node] = start
            self._end[node] = end
            return node
        mid = count // 2
        order = np.argpartition(block[:, dim], mid)
        self._idx[start:end] = sub[order]
        self._split_dim[node] = dim
        self._split_val[node] = float(self._pts[self._idx[start + mid], dim])
        self._left[node] = self._build(start, start + mid)
        self._right[node] = self._build(start + mid, end)
        return node

    def query(self, y, k):
        """k nearest neighbours of a point.

        Parameters
        ----------
        y : array_like, shape (d,)
        k : int
            Requested neighbour count; clamped to n.

        Returns
        -------
        (indices, distances)
            Arrays of length min(k, n), sorted by ascending distance with
            ties broken by ascending point index.
        """
        q = as_query_vector(y, self.d)
        k = int(k)
        if k < 1:
            raise ValueError(f"k must be positive, got {k}")
        k = min(k, self.n)
        if k == self.n:
            # full result set; a direct scan returns the identical answer
            dist = np.sqrt(((self._pts - q) ** 2).sum(axis=1))
            order = np.lexsort((np.arange(self.n), dist))
            return order.astype(np.int64), dist[order]
        # max-heap via negated keys: heap[0] is the current worst keeper,
        # largest (distance, index) lexicographically
        heap = []
        self._search(0, q, k, heap)
        out = sorted((-nd, -ni) for nd, ni in heap)
        indices = np.asarray([i for _, i in out], dtype=np.int64)
        distances = np.asarray([d for d, _ in out], dtype=np.float64)
        return indices, distances

    def _search(self, node, q, k, heap):
        dim = self._split_dim[node]
        if dim == _LEAF:
            sub = self._idx[self._start[node]:self._end[node]]
            diff = self._pts[sub] - q
            dist = np.sqrt((diff * diff).sum(axis=1))
            for d, i in zip(dist.tolist(), sub.tolist()):
                key = (-d, -i)
                if len(heap) < k:
                    heapq.heappush(heap, key)
                elif key > heap[0]:
                    heapq.heapreplace(heap, key)
            return
        gap = q[dim] - self._split_val[node]
        if gap < 0:
            near, far = self._left[node], self._right[node]
        else:
            near, far = self._right[node], self._left[node]
        self._search(near, q, k, heap)
        # the far half-space cannot beat the worst keeper when the axis
        # gap alone already exceeds its distance; equality still explores
        # so an equal-distance lower index can displace it
        if len(heap) < k or abs(gap) <= -heap[0][0]:
            self._search(far, q, k, heap)
