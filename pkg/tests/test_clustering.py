from collections import deque

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wsnsim.clustering import ClusterPartition, UnionFind, aro_cluster, make_sets, rank_order_cluster
from wsnsim.neighbors import build_knn
from wsnsim.oracle import naive_aro_cluster, naive_knn, naive_rank_order_cluster


def blobs(sep=1000.0, size=5, seed=0):
    rng = np.random.default_rng(seed)
    a = rng.uniform(0, 1, (size, 2))
    return np.vstack([a, rng.uniform(0, 1, (size, 2)) + sep])


# -- union-find --------------------------------------------------------------


def test_union_find_basics():
    uf = make_sets(3)
    uf.union(0, 1)
    assert uf.find(0) == uf.find(1) != uf.find(2)


def test_union_is_idempotent():
    uf = UnionFind(4)
    r1 = uf.union(2, 3)
    r2 = uf.union(2, 3)
    assert r1 == r2 and uf.labels() == [0, 1, 2, 2]


@pytest.mark.parametrize("bad", [-1, 3])
def test_out_of_range_rejected(bad):
    with pytest.raises(IndexError):
        UnionFind(3).find(bad)


def bfs_components(n, edges):
    adj = {i: [] for i in range(n)}
    for a, b in edges:
        adj[a].append(b)
        adj[b].append(a)
    label, out = {}, [None] * n
    for s in range(n):
        if s in label:
            continue
        label[s] = s
        q = deque([s])
        while q:
            v = q.popleft()
            out[v] = s
            for w in adj[v]:
                if w not in label:
                    label[w] = s
                    q.append(w)
    return out


@settings(max_examples=60)
@given(st.integers(1, 40).flatmap(lambda n: st.tuples(st.just(n), st.lists(st.tuples(st.integers(0, n - 1), st.integers(0, n - 1)), max_size=60))))
def test_union_find_matches_bfs(case):
    n, edges = case
    uf = UnionFind(n)
    for a, b in edges:
        uf.union(a, b)
    ref = bfs_components(n, edges)
    for a in range(n):
        for b in range(n):
            assert (uf.find(a) == uf.find(b)) == (ref[a] == ref[b])


# -- partitions --------------------------------------------------------------


def test_partition_from_labels():
    p = ClusterPartition.from_labels([7, 7, 3, 9, 3])
    p.validate()
    assert p.n_clusters == 3
    assert p.members(p.cluster_of(0)) == (0, 1)
    assert p.canonical() == frozenset({frozenset({0, 1}), frozenset({2, 4}), frozenset({3})})
    assert p.to_lines() == ["0,1", "2,4", "3"]


def test_head_must_be_member():
    p = ClusterPartition.from_labels([0, 0, 1])
    p.set_head(0, 1)
    assert p.head[0] == 1
    with pytest.raises(ValueError):
        p.set_head(0, 2)


# -- ARO clustering ----------------------------------------------------------


def test_separated_blobs_give_two_clusters():
    p = aro_cluster(build_knn(blobs(), 4), 1.5)
    assert p.canonical() == frozenset({frozenset(range(5)), frozenset(range(5, 10))})


def test_fully_mutual_neighbourhood_is_one_cluster():
    pts = np.random.default_rng(1).uniform(0, 10, (8, 2))
    p = aro_cluster(build_knn(pts, 7), 1.5)
    assert p.n_clusters == 1


def test_isolated_node_stays_singleton():
    pts = np.vstack([blobs(size=4), [[5000.0, 5000.0]]])
    p = aro_cluster(build_knn(pts, 3), 1.5)
    assert frozenset({8}) in p.canonical()


@pytest.mark.parametrize("distance", ["asym", "sym"])
@pytest.mark.parametrize("c", [0.0, 1.0, 1.5, 3.0])
def test_matches_naive_on_random_field(distance, c):
    pts = np.random.default_rng(2).uniform(0, 100, (200, 2))
    got = aro_cluster(build_knn(pts, 20), c, distance=distance).canonical()
    assert got == naive_aro_cluster(naive_knn(pts, 20), c, distance)


def test_threshold_boundary_inclusive():
    # nodes 0 and 1 are each other's nearest neighbour, so they score exactly 0
    pts = np.array([[0.0, 0.0], [1.0, 0.0], [-1.5, 0.0], [2.5, 0.0]])
    t = build_knn(pts, 2)
    assert aro_cluster(t, 0.0).cluster_of(0) == aro_cluster(t, 0.0).cluster_of(1)
    strict = aro_cluster(t, 0.0, inclusive=False)
    assert strict.n_clusters == 4


def test_evaluations_bounded_by_nk():
    pts = np.random.default_rng(3).uniform(0, 100, (300, 2))
    p = aro_cluster(build_knn(pts, 20), 1.5)
    assert 0 < p.evaluations <= 300 * 20


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 10**6))
def test_relabelling_invariance(seed):
    rng = np.random.default_rng(seed)
    pts = rng.uniform(0, 100, (60, 2))
    perm = rng.permutation(60)
    base = aro_cluster(build_knn(pts, 8), 1.5).canonical()
    moved = aro_cluster(build_knn(pts[perm], 8), 1.5).canonical()
    # node i of the permuted field is node perm[i] of the original
    assert frozenset(frozenset(int(perm[i]) for i in c) for c in moved) == base


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 10**6), st.sampled_from([0.5, 1.5, 2.5]))
def test_absorb_refines_closure(seed, c):
    pts = np.random.default_rng(seed).uniform(0, 100, (80, 2))
    t = build_knn(pts, 10)
    closure = aro_cluster(t, c)
    absorb = aro_cluster(t, c, merge="absorb")
    absorb.validate()
    for members in absorb.clusters.values():
        assert len({closure.cluster_of(m) for m in members}) == 1


def test_unknown_modes_rejected():
    t = build_knn(blobs(), 4)
    with pytest.raises(ValueError):
        aro_cluster(t, 1.5, merge="greedy")
    with pytest.raises(ValueError):
        aro_cluster(t, 1.5, distance="cosine")


# -- iterative rank-order ----------------------------------------------------


def test_rank_order_zero_threshold_gives_singletons():
    pts = np.random.default_rng(4).uniform(0, 100, (25, 2))
    assert rank_order_cluster(pts, 0.0, 3).n_clusters == 25


def test_rank_order_huge_threshold_without_gate_gives_one():
    pts = np.random.default_rng(5).uniform(0, 100, (25, 2))
    assert rank_order_cluster(pts, 1e9, 3, normalized_gate=False).n_clusters == 1


def test_rank_order_separates_far_blobs():
    p = rank_order_cluster(blobs(size=6), 50.0, 2)
    assert p.n_clusters >= 2
    for members in p.clusters.values():
        assert len({m < 6 for m in members}) == 1


def test_rank_order_identical_structure_is_one_cluster():
    # mutual nearest neighbours: both rank-order distances vanish
    assert rank_order_cluster([[0, 0], [1, 0]], 0.5, 1, normalized_gate=False).n_clusters == 1
    # rounding splits the equilateral ranks, but all distances stay small
    pts = [[0, 0], [1, 0], [0.5, np.sqrt(3) / 2]]
    assert rank_order_cluster(pts, 2.5, 1, normalized_gate=False).n_clusters == 1


def test_rank_order_gate_is_strict():
    # gap over mean 1-NN distance is exactly 1 for an isolated pair
    assert rank_order_cluster([[0, 0], [3, 0]], 10.0, 1).n_clusters == 2
    assert rank_order_cluster([[0, 0], [3, 0]], 10.0, 1, normalized_gate=False).n_clusters == 1


@pytest.mark.parametrize("seed", range(4))
def test_rank_order_matches_naive(seed):
    rng = np.random.default_rng(seed)
    pts = rng.uniform(0, 100, (30, 2))
    thr = float(rng.uniform(2, 15))
    got = rank_order_cluster(pts, thr, 3)
    got.validate()
    assert got.canonical() == naive_rank_order_cluster(pts, thr, 3)
