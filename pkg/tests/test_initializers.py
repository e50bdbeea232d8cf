import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sbmvb.generate import SbmParams, affiliation_matrix, sample_sbm
from sbmvb.graph import Graph
from sbmvb.initializers import (
    InitConfig,
    WardTree,
    _lloyd,
    init_resp,
    kmeans_rows,
    kmeans_then_ward,
    labels_to_resp,
    perturb_labels,
    random_labels,
    ward_init,
    ward_tree,
)


def disjoint_cliques(sizes):
    n = sum(sizes)
    adj = np.zeros((n, n), dtype=np.uint8)
    start = 0
    true = np.zeros(n, dtype=np.int64)
    for c, size in enumerate(sizes):
        block = slice(start, start + size)
        adj[block, block] = 1
        true[block] = c
        start += size
    np.fill_diagonal(adj, 0)
    return Graph(adj), true


def sse_of_partition(rows, labels):
    total = 0.0
    for c in np.unique(labels):
        members = rows[labels == c]
        total += ((members - members.mean(axis=0)) ** 2).sum()
    return total


def best_two_partition_sse(rows):
    """Exhaustive minimum within-cluster SSE over all 2-partitions."""
    n = rows.shape[0]
    best, best_labels = np.inf, None
    for bits in itertools.product([0, 1], repeat=n - 1):
        labels = np.array((0,) + bits)
        val = sse_of_partition(rows, labels)
        if val < best:
            best, best_labels = val, labels
    return best, best_labels


def same_partition(a, b):
    a, b = np.asarray(a), np.asarray(b)
    return np.array_equal(a[:, None] == a[None, :], b[:, None] == b[None, :])


class TestWard:
    def test_two_cliques_recovered_exactly(self):
        g, true = disjoint_cliques([3, 3])
        labels = ward_tree(g).cut(2)
        # the clique split is the unique SSE-minimizing 2-partition
        rows = g.adj.astype(float)
        best, best_labels = best_two_partition_sse(rows)
        assert same_partition(best_labels, true)
        assert same_partition(labels, true)

    def test_q_one_merges_everything(self):
        g, _ = disjoint_cliques([3, 4])
        assert np.all(ward_tree(g).cut(1) == 0)

    def test_q_equals_n_is_identity(self):
        g, _ = disjoint_cliques([2, 3])
        assert np.array_equal(ward_tree(g).cut(5), np.arange(5))

    def test_cut_rejects_out_of_range(self):
        g, _ = disjoint_cliques([2, 2])
        tree = ward_tree(g)
        with pytest.raises(ValueError):
            tree.cut(0)
        with pytest.raises(ValueError):
            tree.cut(5)

    def test_ward_init_is_hard_simplex(self):
        g, _ = disjoint_cliques([4, 3])
        resp = ward_init(g, 3)
        assert resp.shape == (7, 3)
        assert set(np.unique(resp)) <= {0.0, 1.0}
        assert np.all(resp.sum(axis=1) == 1.0)

    def test_ward_init_rejects_q_above_n(self):
        g, _ = disjoint_cliques([2, 2])
        with pytest.raises(ValueError):
            ward_init(g, 5)

    @given(st.integers(min_value=0, max_value=200), st.integers(min_value=1, max_value=12))
    @settings(max_examples=40)
    def test_cut_always_produces_q_nonempty_clusters(self, seed, q):
        rng = np.random.default_rng(seed)
        upper = np.triu(rng.random((12, 12)) < 0.4, k=1)
        g = Graph((upper | upper.T).astype(np.uint8))
        labels = ward_tree(g).cut(q)
        assert np.unique(labels).size == q
        # class indices are 0..q-1 ordered by smallest member
        assert labels[0] == 0
        assert np.array_equal(np.unique(labels), np.arange(q))

    def test_weighted_merge_order_hand_checked(self):
        # points 0, 1, 2 with sizes 10, 1, 10: the two cheap joins tie
        # (cost 10/11), lexicographic rule picks (0, 1) first
        tree = WardTree(np.array([[0.0], [1.0], [2.0]]), sizes=np.array([10.0, 1.0, 10.0]))
        assert tree.merges[0] == (0, 1)
        assert tree.cut(2).tolist() == [0, 0, 1]

    def test_weights_change_the_winner(self):
        # unweighted: cost(0,1) = 0.5*1.9^2 = 1.805 > cost(1,2) = 0.5*1.1^2
        # = 0.605, so (1,2) merges first; a light cluster at 0 shrinks the
        # (0,1) cost to (0.1/1.1)*3.61 = 0.328 and flips the order
        pts = np.array([[0.0], [1.9], [3.0]])
        assert WardTree(pts).merges[0] == (1, 2)
        light = WardTree(pts, sizes=np.array([0.1, 1.0, 1.0]))
        assert light.merges[0] == (0, 1)

    def test_rejects_bad_sizes(self):
        with pytest.raises(ValueError, match="positive"):
            WardTree(np.zeros((2, 2)), sizes=np.array([1.0, 0.0]))


class TestKmeans:
    def test_identical_rows_tie_to_lowest_cluster(self):
        # empty graph: every adjacency row is the zero vector, so each
        # point is equidistant from both centers and the tie rule decides
        g = Graph(np.zeros((6, 6), dtype=np.uint8))
        labels = kmeans_rows(g, 2, seed=0)
        assert np.all(labels == 0)

    def test_two_cliques_perfect_split(self):
        g, true = disjoint_cliques([5, 5])
        rows = g.adj.astype(float)
        _, best_labels = best_two_partition_sse(rows)
        assert same_partition(best_labels, true)
        for seed in range(5):
            labels = kmeans_rows(g, 2, seed=seed)
            assert same_partition(labels, true), f"seed {seed}"

    def test_k_one_single_cluster(self):
        g, _ = disjoint_cliques([4, 4])
        assert np.all(kmeans_rows(g, 1, seed=0) == 0)

    def test_k_out_of_range(self):
        g, _ = disjoint_cliques([2, 2])
        with pytest.raises(ValueError):
            kmeans_rows(g, 0, seed=0)
        with pytest.raises(ValueError):
            kmeans_rows(g, 5, seed=0)

    @given(st.integers(min_value=0, max_value=100))
    @settings(max_examples=25)
    def test_sse_monotone_when_no_reseeds(self, seed):
        rng = np.random.default_rng(seed)
        upper = np.triu(rng.random((14, 14)) < 0.5, k=1)
        rows = (upper | upper.T).astype(np.float64)
        assign, trace, n_reseeds = _lloyd(rows, 3, np.random.default_rng(seed))
        assert assign.shape == (14,)
        if n_reseeds == 0:
            assert all(b <= a + 1e-9 for a, b in zip(trace, trace[1:]))

    def test_deterministic_given_seed(self):
        g, _ = disjoint_cliques([4, 4, 4])
        a = kmeans_rows(g, 3, seed=7)
        b = kmeans_rows(g, 3, seed=7)
        assert np.array_equal(a, b)


class TestKmeansThenWard:
    def test_two_cliques_through_pipeline(self):
        g, true = disjoint_cliques([5, 5])
        resp = kmeans_then_ward(g, 2, k=4, seed=0)
        assert resp.shape == (10, 2)
        assert np.all(resp.sum(axis=1) == 1.0)
        assert same_partition(np.argmax(resp, axis=1), true)

    def test_three_blocks_sbm(self):
        params = SbmParams.equal_proportions(affiliation_matrix(3, 0.95, 0.02))
        g, true = sample_sbm(params, 36, seed=4)
        resp = kmeans_then_ward(g, 3, k=8, seed=1)
        assert same_partition(np.argmax(resp, axis=1), true)

    def test_k_below_q_rejected(self):
        g, _ = disjoint_cliques([3, 3])
        with pytest.raises(ValueError, match="must be >="):
            kmeans_then_ward(g, 3, k=2)


class TestPerturbAndRandom:
    def test_restart_zero_fraction_is_identity(self):
        labels = np.array([0, 1, 2, 0, 1])
        out = perturb_labels(labels, 3, 0.0, np.random.default_rng(0))
        assert np.array_equal(out, labels)

    def test_moves_ceil_fraction_vertices(self):
        labels = np.zeros(10, dtype=np.int64)
        rng = np.random.default_rng(5)
        out = perturb_labels(labels, 4, 0.25, rng)
        # ceil(0.25 * 10) = 3 distinct vertices redrawn uniformly; a redraw
        # may land on the old class, so at most 3 entries change
        assert (out != labels).sum() <= 3
        assert out.min() >= 0 and out.max() < 4

    def test_does_not_mutate_input(self):
        labels = np.array([0, 0, 1, 1])
        perturb_labels(labels, 2, 1.0, np.random.default_rng(0))
        assert np.array_equal(labels, [0, 0, 1, 1])

    def test_deterministic_given_rng_seed(self):
        labels = np.arange(8) % 3
        a = perturb_labels(labels, 3, 0.5, np.random.default_rng(9))
        b = perturb_labels(labels, 3, 0.5, np.random.default_rng(9))
        assert np.array_equal(a, b)

    def test_random_labels_in_range(self):
        out = random_labels(50, 4, np.random.default_rng(2))
        assert out.shape == (50,)
        assert out.min() >= 0 and out.max() < 4

    def test_labels_to_resp_one_hot(self):
        resp = labels_to_resp(np.array([2, 0, 1]), 3)
        assert np.array_equal(resp, [[0, 0, 1], [1, 0, 0], [0, 1, 0]])


class TestDispatch:
    def test_default_is_ward(self):
        g, _ = disjoint_cliques([3, 3])
        assert np.array_equal(init_resp(g, 2), ward_init(g, 2))

    def test_kmeans_then_ward_route(self):
        g, true = disjoint_cliques([5, 5])
        resp = init_resp(g, 2, InitConfig(method="kmeans_then_ward", kmeans_k=4, seed=0))
        assert same_partition(np.argmax(resp, axis=1), true)

    def test_random_route_is_seeded(self):
        g, _ = disjoint_cliques([4, 4])
        a = init_resp(g, 3, InitConfig(method="random", seed=3))
        b = init_resp(g, 3, InitConfig(method="random", seed=3))
        assert np.array_equal(a, b)
        assert np.all(a.sum(axis=1) == 1.0)

    def test_unknown_method_rejected(self):
        with pytest.raises(ValueError, match="unknown init method"):
            InitConfig(method="spectral")

    def test_bad_kmeans_k_rejected(self):
        with pytest.raises(ValueError, match="kmeans_k"):
            InitConfig(kmeans_k=0)
