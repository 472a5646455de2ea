"""Cluster partitions: one-pass approximate rank-order merging and the
iterative rank-order agglomeration it approximates."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .neighbors import (
    NeighborTable,
    aro_asym_distance,
    aro_sym_distance,
    build_knn,
    cluster_normalized_distance,
    sym_rank_order_distance,
)


class UnionFind:
    """Disjoint sets over 0..n-1; the canonical id of a set is its smallest member."""

    def __init__(self, n: int):
        self.parent = list(range(n))

    def __len__(self):
        return len(self.parent)

    def _check(self, x: int):
        if not 0 <= x < len(self.parent):
            raise IndexError(f"element {x} out of range [0, {len(self.parent)})")

    def find(self, x: int) -> int:
        self._check(x)
        parent = self.parent
        while parent[x] != x:
            parent[x] = parent[parent[x]]  # path halving
            x = parent[x]
        return x

    def union(self, a: int, b: int) -> int:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return ra
        lo, hi = (ra, rb) if ra < rb else (rb, ra)
        self.parent[hi] = lo
        return lo

    def labels(self) -> list[int]:
        return [self.find(i) for i in range(len(self.parent))]


def make_sets(n: int) -> UnionFind:
    return UnionFind(n)


@dataclass
class ClusterPartition:
    """Node-to-cluster assignment with its inverse view.

    Cluster ids are dense and numbered by smallest member id. ``head`` maps a
    cluster id to its current cluster head and starts empty.
    """

    assignment: np.ndarray
    clusters: dict[int, tuple[int, ...]]
    head: dict[int, int] = field(default_factory=dict)
    evaluations: int = 0

    @classmethod
    def from_labels(cls, labels, evaluations: int = 0) -> "ClusterPartition":
        labels = list(labels)
        remap: dict[int, int] = {}
        assignment = np.empty(len(labels), dtype=np.int64)
        members: dict[int, list[int]] = {}
        for node, lab in enumerate(labels):
            cid = remap.setdefault(lab, len(remap))
            assignment[node] = cid
            members.setdefault(cid, []).append(node)
        clusters = {cid: tuple(m) for cid, m in members.items()}
        return cls(assignment, clusters, evaluations=evaluations)

    @property
    def n_clusters(self) -> int:
        return len(self.clusters)

    def members(self, cid: int) -> tuple[int, ...]:
        return self.clusters[cid]

    def cluster_of(self, node: int) -> int:
        return int(self.assignment[node])

    def set_head(self, cid: int, node: int):
        if node not in self.clusters[cid]:
            raise ValueError(f"node {node} is not a member of cluster {cid}")
        self.head[cid] = node

    def sizes(self) -> list[int]:
        return [len(self.clusters[c]) for c in sorted(self.clusters)]

    def canonical(self) -> frozenset[frozenset[int]]:
        """Label-free view, for comparing partitions."""
        return frozenset(frozenset(m) for m in self.clusters.values())

    def validate(self):
        seen = set()
        for cid, mem in self.clusters.items():
            if not mem:
                raise AssertionError(f"cluster {cid} is empty")
            for node in mem:
                if node in seen:
                    raise AssertionError(f"node {node} assigned twice")
                if self.assignment[node] != cid:
                    raise AssertionError(f"assignment of node {node} disagrees with cluster {cid}")
                seen.add(node)
        if len(seen) != len(self.assignment):
            raise AssertionError("some nodes are unassigned")
        for cid, h in self.head.items():
            if h not in self.clusters[cid]:
                raise AssertionError(f"head {h} is not a member of cluster {cid}")

    def to_lines(self) -> list[str]:
        return [",".join(str(m) for m in self.clusters[c]) for c in sorted(self.clusters)]


def aro_pair_distance(a: int, b: int, table: NeighborTable, distance: str = "asym") -> float:
    """Merge score for a mutually listed pair.

    ``asym``: each node scores the other with the one-sided top-k distance and
    the pair scores the smaller of the two. ``sym``: the normalised symmetric
    top-k distance.
    """
    if distance == "asym":
        return min(aro_asym_distance(a, b, table), aro_asym_distance(b, a, table))
    if distance == "sym":
        return aro_sym_distance(a, b, table)
    raise ValueError(f"unknown ARO distance {distance!r}")


def aro_cluster(
    table: NeighborTable,
    threshold_c: float,
    distance: str = "asym",
    merge: str = "closure",
    inclusive: bool = True,
) -> ClusterPartition:
    """One pass over mutually listed pairs, merging those scoring within the threshold.

    ``merge="closure"`` unions every qualifying pair, so merges chain
    transitively. ``merge="absorb"`` only lets an unclustered node join a
    cluster (or two unclustered nodes found one); two existing clusters are
    never fused. Pairs are visited in ascending (min id, max id) order.
    """
    if merge not in ("closure", "absorb"):
        raise ValueError(f"unknown merge mode {merge!r}")
    n = table.n
    uf = UnionFind(n)
    clustered = [False] * n
    evaluations = 0
    for a, b in table.mutual_pairs():
        score = aro_pair_distance(a, b, table, distance)
        evaluations += 2
        if not (score <= threshold_c if inclusive else score < threshold_c):
            continue
        if merge == "closure":
            uf.union(a, b)
        elif not (clustered[a] and clustered[b]):
            uf.union(a, b)
            clustered[a] = clustered[b] = True
    return ClusterPartition.from_labels(uf.labels(), evaluations=evaluations)


def rank_order_cluster(positions, threshold: float, K: int, normalized_gate: bool = True) -> ClusterPartition:
    """Iterative rank-order agglomeration over full neighbour rankings.

    Each round merges every cluster pair whose minimum cross-pair symmetric
    rank-order distance is below ``threshold`` and, with the gate on, whose
    cluster-level normalised distance is below 1. Rounds repeat until
    nothing merges.
    """
    pos = np.asarray(positions, dtype=float).reshape(-1, 2)
    n = len(pos)
    table = build_knn(pos, n - 1)
    D = np.zeros((n, n))
    for a in range(n):
        for b in range(a + 1, n):
            D[a, b] = D[b, a] = sym_rank_order_distance(a, b, table)

    clusters = [[i] for i in range(n)]
    while len(clusters) > 1:
        uf = UnionFind(len(clusters))
        merged = False
        for i in range(len(clusters)):
            for j in range(i + 1, len(clusters)):
                d = D[np.ix_(clusters[i], clusters[j])].min()
                if not d < threshold:
                    continue
                if normalized_gate and not cluster_normalized_distance(clusters[i], clusters[j], K, table) < 1.0:
                    continue
                uf.union(i, j)
                merged = True
        if not merged:
            break
        groups: dict[int, list[int]] = {}
        for i, root in enumerate(uf.labels()):
            groups.setdefault(root, []).extend(clusters[i])
        clusters = [sorted(g) for _, g in sorted(groups.items())]

    labels = np.empty(n, dtype=np.int64)
    for cid, members in enumerate(sorted(clusters)):
        labels[members] = cid
    return ClusterPartition.from_labels(labels)
