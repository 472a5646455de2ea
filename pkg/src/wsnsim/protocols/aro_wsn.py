"""ARO-WSN: clusters formed once by approximate rank-order merging; heads
rotate only when they fall below the network's mean residual energy."""
from __future__ import annotations

import numpy as np

from ..clustering import ClusterPartition, aro_cluster
from ..neighbors import build_knn
from ..radio import RadioParams, rx_energy, tx_energy
from .base import Network, ProtocolParams, RoundPlan


class AroWsn:
    name = "ARO-WSN"

    def __init__(self, net: Network, radio: RadioParams, params: ProtocolParams, rng: np.random.Generator):
        self.net, self.radio, self.params, self.rng = net, radio, params, rng
        self.partition: ClusterPartition | None = None
        self.members: list[np.ndarray] = []
        self.diameter: list[float] = []
        self.heads: np.ndarray = np.empty(0, dtype=np.int64)

    def initialize(self) -> tuple[np.ndarray, int]:
        """Location reports to the base station, then the one-time clustering."""
        net, radio, params = self.net, self.radio, self.params
        charges = np.zeros(net.n)
        nodes = net.alive_ids()
        charges[nodes] = tx_energy(radio.ctrl_bits, net.dist_bs[nodes], radio)
        k = min(params.knn_k, net.n - 1)
        table = build_knn(net.positions, k, backend=params.knn_backend)
        self.partition = aro_cluster(
            table, params.merge_threshold, distance=params.aro_distance, merge=params.aro_merge
        )
        self.members = [np.array(self.partition.members(c), dtype=np.int64) for c in range(self.partition.n_clusters)]
        self.diameter = [float(net.dist[np.ix_(m, m)].max()) for m in self.members]
        self.heads = np.full(self.partition.n_clusters, -1, dtype=np.int64)
        return charges, len(nodes)

    def _pick(self, cid: int, alive_members: np.ndarray, mean: float) -> int:
        """Keep the head while it holds at least the mean; otherwise draw
        random other members until one does, at most one draw per member."""
        energy = self.net.energy
        head = int(self.heads[cid])
        if head >= 0 and self.net.alive[head] and energy[head] >= mean:
            return head
        others = alive_members[alive_members != head]
        if len(others) == 0:
            return head
        draws = others[self.rng.integers(0, len(others), size=len(others))]
        ok = np.flatnonzero(energy[draws] >= mean)
        if len(ok):
            return int(draws[ok[0]])
        # nobody at the mean: richest member, lowest id on ties
        return int(alive_members[np.lexsort((alive_members, -energy[alive_members]))[0]])

    def setup(self, r: int) -> RoundPlan:
        net, radio = self.net, self.radio
        plan = RoundPlan.empty(net.n)
        if not net.alive.any():
            return plan
        mean = net.mean_energy()
        ctrl = radio.ctrl_bits
        heads = []
        for cid, mem in enumerate(self.members):
            live = mem[net.alive[mem]]
            if len(live) == 0:
                continue  # retired for good
            old = int(self.heads[cid])
            new = self._pick(cid, live, mean)
            if new != old:
                self.heads[cid] = new
                plan.control_charges[new] += tx_energy(ctrl, self.diameter[cid], radio)
                plan.control_charges[live[live != new]] += rx_energy(ctrl, radio)
                plan.ads += 1
                plan.bs_control_msgs += 1
                self.partition.head[cid] = new
            plan.membership[live] = new
            heads.append(new)
        plan.ch_set = np.array(sorted(heads), dtype=np.int64)
        return plan
