"""Ranked nearest-neighbour tables and the rank-order family of distances.

Ranks are 1-based positions in a node's distance-sorted list. A node's rank
in its own list is 0 by convention, and ``None`` means "not listed".
"""
from __future__ import annotations

import math
from collections.abc import Iterable, Iterator

import numpy as np


class NeighborTable:
    """Top-k nearest-neighbour lists with an inverse rank lookup.

    ``lists[a]`` holds the k nearest other nodes of ``a`` by Euclidean
    distance, ties broken by ascending id. ``positions`` is kept so that the
    cluster-level normalisation can use geometric distances.
    """

    def __init__(self, positions: np.ndarray, lists: np.ndarray):
        self.positions = np.asarray(positions, dtype=float)
        self.lists = np.asarray(lists, dtype=np.int64)
        self.n, self.k = self.lists.shape
        self._rank = [{int(b): i + 1 for i, b in enumerate(row)} for row in self.lists]

    def __len__(self):
        return self.n

    def neighbors(self, a: int) -> np.ndarray:
        return self.lists[a]

    def rank(self, a: int, b: int) -> int | None:
        """O_a(b): position of b in a's list, 0 when a == b, None if absent."""
        if a == b:
            return 0
        return self._rank[a].get(b)

    def contains(self, a: int, b: int) -> bool:
        return b in self._rank[a]

    def mutual(self, a: int, b: int) -> bool:
        return a != b and b in self._rank[a] and a in self._rank[b]

    def mutual_pairs(self) -> Iterator[tuple[int, int]]:
        """Unordered mutually-listed pairs in ascending (min id, max id) order."""
        for a in range(self.n):
            for b in sorted(int(x) for x in self.lists[a] if x > a):
                if a in self._rank[b]:
                    yield a, b

    def geometric_distance(self, a: int, b: int) -> float:
        p, q = self.positions[a], self.positions[b]
        return math.hypot(p[0] - q[0], p[1] - q[1])

    def to_lines(self) -> list[str]:
        """Debug dump: ``node: n1,n2,...`` per node."""
        return [f"{a}: " + ",".join(str(int(b)) for b in row) for a, row in enumerate(self.lists)]


def _check_k(n: int, k: int):
    if k < 1:
        raise ValueError(f"k must be at least 1, got {k}")
    if k >= n:
        raise ValueError(f"k must be smaller than the number of points ({n}), got {k}")


def _brute_lists(pos: np.ndarray, k: int) -> np.ndarray:
    dx = pos[:, None, 0] - pos[None, :, 0]
    dy = pos[:, None, 1] - pos[None, :, 1]
    d2 = dx * dx + dy * dy
    np.fill_diagonal(d2, np.inf)
    # stable sort keeps ascending column ids among equal distances
    return np.argsort(d2, axis=1, kind="stable")[:, :k]


def _grid_lists(pos: np.ndarray, k: int) -> np.ndarray:
    n = len(pos)
    lo = pos.min(axis=0)
    span = np.maximum(pos.max(axis=0) - lo, 1e-12)
    # roughly k points per cell; the linear term covers (near-)collinear sets
    cell = max(math.sqrt(span[0] * span[1] * k / n), float(span.max()) * k / n, 1e-9)
    cx = np.floor((pos[:, 0] - lo[0]) / cell).astype(np.int64)
    cy = np.floor((pos[:, 1] - lo[1]) / cell).astype(np.int64)
    buckets: dict[tuple[int, int], list[int]] = {}
    for i in range(n):
        buckets.setdefault((int(cx[i]), int(cy[i])), []).append(i)
    max_ring = int(max(cx.max(), cy.max())) + 1
    out = np.empty((n, k), dtype=np.int64)
    for i in range(n):
        ci, cj = int(cx[i]), int(cy[i])
        cand: list[int] = []
        ring = 0
        while True:
            for gx in range(ci - ring, ci + ring + 1):
                for gy in range(cj - ring, cj + ring + 1):
                    if max(abs(gx - ci), abs(gy - cj)) != ring:
                        continue
                    cand.extend(buckets.get((gx, gy), ()))
            if len(cand) > k or ring >= max_ring:
                idx = np.array([j for j in cand if j != i], dtype=np.int64)
                dx = pos[idx, 0] - pos[i, 0]
                dy = pos[idx, 1] - pos[i, 1]
                d2 = dx * dx + dy * dy
                order = np.lexsort((idx, d2))
                if len(idx) >= k:
                    kth = d2[order[k - 1]]
                    # every unexplored point is at least ring*cell away
                    if kth < (ring * cell) ** 2 or ring >= max_ring:
                        out[i] = idx[order[:k]]
                        break
            ring += 1
    return out


def build_knn(positions, k: int, backend: str = "brute") -> NeighborTable:
    pos = np.asarray(positions, dtype=float).reshape(-1, 2)
    _check_k(len(pos), k)
    if backend == "brute":
        lists = _brute_lists(pos, k)
    elif backend == "grid":
        lists = _grid_lists(pos, k)
    else:
        raise ValueError(f"unknown knn backend {backend!r}")
    return NeighborTable(pos, lists)


# -- full-ranking rank-order distances ------------------------------------


def _require_full(table: NeighborTable):
    if table.k != table.n - 1:
        raise ValueError("rank-order distances need full neighbour lists (k = n - 1)")


def asym_rank_order_distance(a: int, b: int, table: NeighborTable) -> int:
    """sum_{i=1..O_a(b)} O_b(f_a(i))."""
    _require_full(table)
    if a == b:
        return 0
    r = table.rank(a, b)
    return sum(table.rank(b, int(f)) for f in table.lists[a][:r])


def sym_rank_order_distance(a: int, b: int, table: NeighborTable) -> float:
    if a == b:
        raise ValueError("symmetric rank-order distance is undefined for a node and itself")
    num = asym_rank_order_distance(a, b, table) + asym_rank_order_distance(b, a, table)
    return num / min(table.rank(a, b), table.rank(b, a))


def cluster_normalized_distance(ci: Iterable[int], cj: Iterable[int], K: int, table: NeighborTable) -> float:
    """Minimum cross-cluster Euclidean distance over the mean K-NN distance of all members."""
    ci, cj = sorted(set(ci)), sorted(set(cj))
    if not ci or not cj:
        raise ValueError("clusters must be non-empty")
    if set(ci) & set(cj):
        raise ValueError("clusters must be disjoint")
    if not 1 <= K <= table.k:
        raise ValueError(f"K must lie in [1, {table.k}], got {K}")
    pos = table.positions
    diff = pos[ci][:, None, :] - pos[cj][None, :, :]
    d_min = float(np.sqrt((diff**2).sum(-1)).min())
    members = ci + cj
    knn_d = np.linalg.norm(pos[table.lists[members, :K]] - pos[members][:, None, :], axis=-1)
    phi = float(knn_d.mean(axis=1).mean())
    if phi == 0.0:
        return 0.0 if d_min == 0.0 else math.inf
    return d_min / phi


# -- approximate (top-k presence) distances ---------------------------------


def aro_asym_distance(a: int, b: int, table: NeighborTable) -> int:
    """Count of a's first min(O_a(b), k) neighbours missing from b's top-k list."""
    r = table.rank(a, b)
    if r is None or a == b:
        raise ValueError(f"node {b} is not in the neighbour list of node {a}")
    listed = table._rank[b]
    return sum(1 for f in table.lists[a][: min(r, table.k)] if f != b and int(f) not in listed)


def aro_sym_distance(a: int, b: int, table: NeighborTable) -> float:
    if not table.mutual(a, b):
        raise ValueError(f"nodes {a} and {b} are not in each other's neighbour lists")
    num = aro_asym_distance(a, b, table) + aro_asym_distance(b, a, table)
    return num / min(table.rank(a, b), table.rank(b, a))
