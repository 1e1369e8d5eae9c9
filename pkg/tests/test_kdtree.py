"""Exactness of the k-d tree against a brute-force neighbour scan."""

import numpy as np
import pytest

from nwbound.kdtree import KdTree


def brute_knn(X, q, k):
    dist = np.sqrt(((X - q) ** 2).sum(axis=1))
    order = np.lexsort((np.arange(len(X)), dist))[: min(k, len(X))]
    return order.astype(np.int64), dist[order]


def assert_same_result(tree, X, q, k):
    idx, dist = tree.query(q, k)
    bidx, bdist = brute_knn(X, q, k)
    np.testing.assert_array_equal(idx, bidx)
    np.testing.assert_array_equal(dist, bdist)


class TestQueryExactness:
    def test_random_instances_match_brute_force(self):
        rng = np.random.default_rng(0)
        for _ in range(150):
            n = int(rng.integers(1, 200))
            d = int(rng.integers(1, 7))
            X = rng.normal(size=(n, d))
            tree = KdTree(X, leaf_size=int(rng.integers(1, 32)))
            q = rng.normal(size=d)
            k = int(rng.integers(1, n + 3))
            assert_same_result(tree, X, q, k)

    def test_duplicate_points_all_retained(self):
        X = np.array([[1.0, 1.0]] * 5 + [[2.0, 2.0]] * 3)
        tree = KdTree(X)
        idx, dist = tree.query([1.0, 1.0], 5)
        np.testing.assert_array_equal(idx, [0, 1, 2, 3, 4])
        np.testing.assert_array_equal(dist, 0.0)

    def test_tie_breaks_by_lower_index(self):
        # symmetric pair around the query at identical distance
        X = np.array([[2.0], [0.0]])
        tree = KdTree(X)
        idx, _ = tree.query([1.0], 1)
        assert idx[0] == 0

    def test_query_on_a_training_point(self):
        rng = np.random.default_rng(3)
        X = rng.normal(size=(60, 3))
        tree = KdTree(X)
        idx, dist = tree.query(X[17], 1)
        assert idx[0] == 17 and dist[0] == 0.0

    def test_k_clamped_to_n(self):
        X = np.array([[0.0], [1.0], [2.0]])
        tree = KdTree(X)
        idx, dist = tree.query([0.4], 10)
        assert len(idx) == 3
        np.testing.assert_array_equal(idx, [0, 1, 2])

    def test_k_equal_n_is_the_full_sort(self):
        rng = np.random.default_rng(5)
        X = rng.normal(size=(40, 2))
        assert_same_result(KdTree(X), X, rng.normal(size=2), 40)

    def test_single_point_tree(self):
        tree = KdTree([[3.0, 4.0]])
        idx, dist = tree.query([0.0, 0.0], 1)
        assert idx[0] == 0 and dist[0] == 5.0

    def test_all_identical_points(self):
        X = np.full((20, 2), 7.0)
        tree = KdTree(X, leaf_size=4)
        idx, dist = tree.query([7.0, 7.0], 6)
        np.testing.assert_array_equal(idx, np.arange(6))
        np.testing.assert_array_equal(dist, 0.0)

    @pytest.mark.parametrize("leaf_size", [1, 2, 8, 64])
    def test_leaf_size_does_not_change_answers(self, leaf_size):
        rng = np.random.default_rng(9)
        X = rng.uniform(size=(120, 4))
        tree = KdTree(X, leaf_size=leaf_size)
        for _ in range(20):
            assert_same_result(tree, X, rng.uniform(size=4), 7)

    def test_high_dimension_small_n(self):
        rng = np.random.default_rng(13)
        X = rng.normal(size=(30, 40))
        assert_same_result(KdTree(X), X, rng.normal(size=40), 10)

    def test_grid_with_many_axis_ties(self):
        xs = np.arange(6, dtype=float)
        X = np.array([[a, b] for a in xs for b in xs])
        tree = KdTree(X, leaf_size=3)
        for q in ([2.5, 2.5], [0.0, 0.0], [5.0, 2.0], [-1.0, 7.0]):
            assert_same_result(tree, X, np.asarray(q), 9)


class TestValidation:
    def test_k_must_be_positive(self):
        tree = KdTree([[0.0]])
        with pytest.raises(ValueError, match="k must be positive"):
            tree.query([0.0], 0)

    def test_leaf_size_must_be_positive(self):
        with pytest.raises(ValueError, match="leaf_size"):
            KdTree([[0.0]], leaf_size=0)

    def test_query_dimension_checked(self):
        tree = KdTree([[0.0, 0.0]])
        with pytest.raises(ValueError):
            tree.query([0.0, 0.0, 0.0], 1)

    def test_shape_accessors(self):
        tree = KdTree(np.zeros((5, 3)))
        assert (tree.n, tree.d) == (5, 3)
