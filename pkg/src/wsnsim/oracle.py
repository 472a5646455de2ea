"""Slow reference implementations for equivalence checks.

Everything here is deliberately naive: plain Python sorting, sets and
breadth-first search, sharing no code with the production paths.
"""
from __future__ import annotations

from collections import deque

import numpy as np

from .clustering import aro_cluster, rank_order_cluster
from .neighbors import aro_asym_distance, aro_sym_distance, build_knn


def naive_knn(points, k: int) -> list[list[int]]:
    pts = [(float(x), float(y)) for x, y in points]
    out = []
    for i, (xi, yi) in enumerate(pts):
        scored = []
        for j, (xj, yj) in enumerate(pts):
            if j != i:
                dx, dy = xi - xj, yi - yj
                scored.append((dx * dx + dy * dy, j))
        scored.sort()
        out.append([j for _, j in scored[:k]])
    return out


def naive_aro_asym(a: int, b: int, lists) -> int:
    la, lb = list(lists[a]), set(lists[b])
    r = la.index(b) + 1
    return sum(1 for f in la[:r] if f != b and f not in lb)


def naive_aro_sym(a: int, b: int, lists) -> float:
    ra = list(lists[a]).index(b) + 1
    rb = list(lists[b]).index(a) + 1
    return (naive_aro_asym(a, b, lists) + naive_aro_asym(b, a, lists)) / min(ra, rb)


def _components(n: int, edges) -> frozenset:
    adj = [[] for _ in range(n)]
    for a, b in edges:
        adj[a].append(b)
        adj[b].append(a)
    seen = [False] * n
    parts = []
    for s in range(n):
        if seen[s]:
            continue
        seen[s] = True
        comp, queue = [], deque([s])
        while queue:
            v = queue.popleft()
            comp.append(v)
            for w in adj[v]:
                if not seen[w]:
                    seen[w] = True
                    queue.append(w)
        parts.append(frozenset(comp))
    return frozenset(parts)


def naive_aro_cluster(lists, threshold: float, distance: str = "asym") -> frozenset:
    n = len(lists)
    sets = [set(row) for row in lists]
    edges = []
    for a in range(n):
        for b in range(a + 1, n):
            if b in sets[a] and a in sets[b]:
                if distance == "asym":
                    score = min(naive_aro_asym(a, b, lists), naive_aro_asym(b, a, lists))
                else:
                    score = naive_aro_sym(a, b, lists)
                if score <= threshold:
                    edges.append((a, b))
    return _components(n, edges)


def naive_rank_order_cluster(points, threshold: float, K: int) -> frozenset:
    pts = [(float(x), float(y)) for x, y in points]
    n = len(pts)
    order = naive_knn(pts, n - 1)
    rank = [{j: i + 1 for i, j in enumerate(row)} for row in order]
    for i in range(n):
        rank[i][i] = 0

    def asym(a, b):
        return sum(rank[b][f] for f in order[a][: rank[a][b]])

    def sym(a, b):
        return (asym(a, b) + asym(b, a)) / min(rank[a][b], rank[b][a])

    def euclid(a, b):
        return ((pts[a][0] - pts[b][0]) ** 2 + (pts[a][1] - pts[b][1]) ** 2) ** 0.5

    knn_mean = [sum(euclid(i, j) for j in order[i][:K]) / K for i in range(n)]
    clusters = [frozenset([i]) for i in range(n)]
    while True:
        edges = []
        for i in range(len(clusters)):
            for j in range(i + 1, len(clusters)):
                d = min(sym(a, b) for a in clusters[i] for b in clusters[j])
                if d >= threshold:
                    continue
                members = clusters[i] | clusters[j]
                phi = sum(knn_mean[m] for m in members) / len(members)
                d_geo = min(euclid(a, b) for a in clusters[i] for b in clusters[j])
                gate = (0.0 if d_geo == 0 else float("inf")) if phi == 0 else d_geo / phi
                if gate < 1.0:
                    edges.append((i, j))
        if not edges:
            return frozenset(clusters)
        comps = _components(len(clusters), edges)
        clusters = [frozenset().union(*(clusters[c] for c in comp)) for comp in comps]


def check_knn(n: int, seed: int, instances: int = 50) -> list[str]:
    """Compare the production kNN, ARO distances and ARO clustering against
    the naive versions on random instances. Returns mismatch descriptions."""
    rng = np.random.default_rng(seed)
    problems = []
    for t in range(instances):
        size = n if n else int(rng.integers(20, 201))
        k = int(rng.integers(5, min(20, size - 1) + 1))
        pts = rng.uniform(0, 100, size=(size, 2))
        if t % 5 == 4:
            pts = np.round(pts / 5) * 5  # lattice snapping forces distance ties
        ref = naive_knn(pts, k)
        for backend in ("brute", "grid"):
            table = build_knn(pts, k, backend=backend)
            if table.lists.tolist() != ref:
                problems.append(f"instance {t}: {backend} kNN lists differ")
        table = build_knn(pts, k)
        for a in range(size):
            for b in ref[a]:
                if aro_asym_distance(a, b, table) != naive_aro_asym(a, b, ref):
                    problems.append(f"instance {t}: asym distance ({a},{b}) differs")
                if a in ref[b] and aro_sym_distance(a, b, table) != naive_aro_sym(a, b, ref):
                    problems.append(f"instance {t}: sym distance ({a},{b}) differs")
        c = float(rng.choice([0.5, 1.0, 1.5, 2.0, 3.0]))
        for dist in ("asym", "sym"):
            got = aro_cluster(table, c, distance=dist).canonical()
            if got != naive_aro_cluster(ref, c, dist):
                problems.append(f"instance {t}: {dist} clustering differs at C={c}")
    return problems


def check_rankorder(n: int, seed: int, instances: int = 10) -> list[str]:
    rng = np.random.default_rng(seed)
    problems = []
    for t in range(instances):
        size = n if n else int(rng.integers(10, 41))
        pts = rng.uniform(0, 100, size=(size, 2))
        threshold = float(rng.uniform(1.0, 20.0))
        K = int(rng.integers(1, min(10, size - 1) + 1))
        got = rank_order_cluster(pts, threshold, K).canonical()
        if got != naive_rank_order_cluster(pts, threshold, K):
            problems.append(f"instance {t}: rank-order partition differs (threshold={threshold:.3f}, K={K})")
    return problems
