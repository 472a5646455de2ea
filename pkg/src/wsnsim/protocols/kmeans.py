"""K-means clustering at the sink, re-run every round."""
from __future__ import annotations

import numpy as np

from ..radio import RadioParams, rx_energy, tx_energy
from .base import Network, ProtocolParams, RoundPlan


def _assign(points, centroids):
    d2 = ((points[:, None, :] - centroids[None, :, :]) ** 2).sum(-1)
    return np.argmin(d2, axis=1), d2


def lloyd(points, centroids, tol: float = 1e-6, max_iter: int = 100):
    """Lloyd iterations from the given centroids.

    An empty cluster is reseeded on the point farthest from its nearest
    centroid. Stops when no centroid moves more than ``tol`` or after
    ``max_iter`` updates. Returns (labels, centroids, iterations).
    """
    points = np.asarray(points, dtype=float)
    cent = np.array(centroids, dtype=float, copy=True)
    k = len(cent)
    it = 0
    for it in range(1, max_iter + 1):
        labels, d2 = _assign(points, cent)
        counts = np.bincount(labels, minlength=k)
        for j in np.flatnonzero(counts == 0):
            nearest = d2[np.arange(len(points)), labels]
            far = int(np.argmax(nearest))
            if nearest[far] == 0.0:
                break  # every point already sits on a centroid
            cent[j] = points[far]
            labels, d2 = _assign(points, cent)
            counts = np.bincount(labels, minlength=k)
        new = cent.copy()
        filled = counts > 0
        for dim in range(points.shape[1]):
            sums = np.bincount(labels, weights=points[:, dim], minlength=k)
            new[filled, dim] = sums[filled] / counts[filled]
        move = np.sqrt(((new - cent) ** 2).sum(-1)).max()
        cent = new
        if move <= tol:
            break
    labels, _ = _assign(points, cent)
    return labels, cent, it


def pick_heads(nodes, labels, centroids, energy, positions) -> np.ndarray:
    """Per cluster: most residual energy, then closest to the centroid, then lowest id."""
    heads = []
    for j in range(len(centroids)):
        idx = np.flatnonzero(labels == j)
        if len(idx) == 0:
            continue
        ids = nodes[idx]
        dc = np.linalg.norm(positions[ids] - centroids[j], axis=1)
        best = np.lexsort((ids, dc, -energy[ids]))[0]
        heads.append(ids[best])
    return np.array(heads, dtype=np.int64)


class KMeans:
    name = "KMEANS"

    def __init__(self, net: Network, radio: RadioParams, params: ProtocolParams, rng: np.random.Generator):
        self.net, self.radio, self.params, self.rng = net, radio, params, rng

    def initialize(self) -> tuple[np.ndarray, int]:
        return np.zeros(self.net.n), 0

    def setup(self, r: int) -> RoundPlan:
        net, radio, params = self.net, self.radio, self.params
        plan = RoundPlan.empty(net.n)
        nodes = net.alive_ids()
        if len(nodes) == 0:
            return plan
        ctrl = radio.ctrl_bits
        plan.control_charges[nodes] += tx_energy(ctrl, net.dist_bs[nodes], radio)
        plan.control_charges[nodes] += rx_energy(ctrl, radio)
        plan.bs_control_msgs = len(nodes)

        k = params.clusters_for(len(nodes))
        start = self.rng.uniform((0.0, 0.0), (net.width, net.height), size=(k, 2))
        labels, cent, _ = lloyd(net.positions[nodes], start, params.kmeans_tol, params.kmeans_max_iter)
        heads = pick_heads(nodes, labels, cent, net.energy, net.positions)
        plan.ch_set = np.sort(heads)
        # members follow their own cluster's head
        head_of = np.full(len(cent), -1, dtype=np.int64)
        for h in heads:
            head_of[labels[np.searchsorted(nodes, h)]] = h
        plan.membership[nodes] = head_of[labels]
        return plan
