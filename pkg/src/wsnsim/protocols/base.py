"""Shared network state, round plans and steady-state accounting."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..radio import RadioParams, aggregation_energy, rx_energy, tx_energy

DIRECT = -1  # node sends its own data straight to the base station
IDLE = -2  # node takes no part this round (dead)


@dataclass(frozen=True)
class ProtocolParams:
    p: float = 0.05  # LEACH desired cluster-head fraction
    k_clusters: int | None = None  # None: ceil(p * alive) each round
    merge_threshold: float = 1.5
    knn_k: int = 20
    aro_distance: str = "asym"
    aro_merge: str = "closure"
    knn_backend: str = "brute"
    sa_moves_per_cluster: int = 500
    kmeans_tol: float = 1e-6
    kmeans_max_iter: int = 100
    ad_range: float | None = None  # LEACH advertisement range; None: field diagonal

    def __post_init__(self):
        if not 0 < self.p < 1:
            raise ValueError(f"p must lie in (0, 1), got {self.p}")
        if self.k_clusters is not None and self.k_clusters < 1:
            raise ValueError("k_clusters must be positive")
        if self.merge_threshold < 0:
            raise ValueError("merge_threshold must be non-negative")
        if self.knn_k < 1:
            raise ValueError("knn_k must be positive")
        if self.aro_distance not in ("asym", "sym"):
            raise ValueError(f"aro_distance must be 'asym' or 'sym', got {self.aro_distance!r}")
        if self.aro_merge not in ("closure", "absorb"):
            raise ValueError(f"aro_merge must be 'closure' or 'absorb', got {self.aro_merge!r}")
        if self.knn_backend not in ("brute", "grid"):
            raise ValueError(f"knn_backend must be 'brute' or 'grid', got {self.knn_backend!r}")
        if self.sa_moves_per_cluster < 1:
            raise ValueError("sa_moves_per_cluster must be positive")

    def clusters_for(self, n_alive: int) -> int:
        k = self.k_clusters if self.k_clusters is not None else math.ceil(self.p * n_alive)
        return max(1, min(k, n_alive))


class Network:
    """Mutable per-simulation node state plus cached geometry."""

    def __init__(self, positions, bs, initial_energy: float, width: float, height: float):
        self.positions = np.asarray(positions, dtype=float)
        self.n = len(self.positions)
        self.bs = np.asarray(bs, dtype=float)
        self.initial_energy = float(initial_energy)
        self.width, self.height = float(width), float(height)
        self.energy = np.full(self.n, self.initial_energy)
        self.alive = self.energy > 0
        diff = self.positions[:, None, :] - self.positions[None, :, :]
        self.dist2 = (diff**2).sum(-1)
        self.dist = np.sqrt(self.dist2)
        self.dist_bs = np.linalg.norm(self.positions - self.bs, axis=1)
        self.diagonal = math.hypot(self.width, self.height)

    def alive_ids(self) -> np.ndarray:
        return np.flatnonzero(self.alive)

    def mean_energy(self) -> float:
        return network_mean_energy(self.energy, self.alive)


def network_mean_energy(energy, alive) -> float:
    """Mean residual energy over alive nodes only."""
    energy = np.asarray(energy, dtype=float)
    alive = np.asarray(alive, dtype=bool)
    if not alive.any():
        raise ValueError("mean energy is undefined with no alive nodes")
    return float(energy[alive].mean())


@dataclass
class RoundPlan:
    ch_set: np.ndarray
    membership: np.ndarray  # per node: CH id, DIRECT or IDLE
    control_charges: np.ndarray
    ads: int = 0
    bs_control_msgs: int = 0
    superior: int | None = None  # FUZZY-LEACH relay for all other CHs

    @classmethod
    def empty(cls, n: int) -> "RoundPlan":
        return cls(np.empty(0, dtype=np.int64), np.full(n, IDLE, dtype=np.int64), np.zeros(n))

    def validate(self, alive: np.ndarray):
        chs = set(int(c) for c in self.ch_set)
        for c in chs:
            if not alive[c]:
                raise AssertionError(f"cluster head {c} is dead")
            if self.membership[c] != c:
                raise AssertionError(f"cluster head {c} is not its own head")
        for i in np.flatnonzero(alive):
            m = int(self.membership[i])
            if m != DIRECT and m not in chs:
                raise AssertionError(f"node {i} maps to {m}, which is not a cluster head")
        if (self.membership[~alive] != IDLE).any():
            raise AssertionError("dead nodes must be idle")
        if (self.control_charges[~alive] != 0).any():
            raise AssertionError("control energy charged to a dead node")


@dataclass
class SteadyStateOutcome:
    charges: np.ndarray
    bs_messages: int
    lost_messages: int


def steady_state(plan: RoundPlan, net: Network, radio: RadioParams) -> SteadyStateOutcome:
    """Charges for one data round: members to heads, heads to the base station.

    Delivery needs enough residual energy for the whole transmission; a node
    short of it still spends what it has (clamped later) and its message is
    lost. Heads that died during setup lose their members' data.
    """
    n = net.n
    bits = radio.msg_bits
    energy, alive = net.energy, net.alive
    memb = np.where(alive, plan.membership, IDLE)
    charges = np.zeros(n)
    lost = 0

    nodes = np.flatnonzero(alive)
    to_head = nodes[(memb[nodes] >= 0) & (memb[nodes] != nodes)]
    heads = np.array(sorted(int(c) for c in plan.ch_set if alive[c]), dtype=np.int64)
    direct = nodes[memb[nodes] == DIRECT]

    # members -> head (also when the head has died: energy spent, data lost)
    charges[to_head] += tx_energy(bits, net.dist[to_head, memb[to_head]], radio)
    sent_ok = energy[to_head] >= charges[to_head]
    head_alive = alive[memb[to_head]]
    lost += int((~head_alive).sum())
    lost += int((~sent_ok & head_alive).sum())

    senders = np.bincount(memb[to_head][head_alive], minlength=n)
    charges[heads] += senders[heads] * rx_energy(bits, radio)
    charges[heads] += aggregation_energy(bits, senders[heads] + 1, radio)

    bs_msgs = plan.bs_control_msgs
    # a relay that died during setup leaves every head on its own uplink
    sup = plan.superior if plan.superior is not None and alive[plan.superior] else None
    if sup is None:
        charges[heads] += tx_energy(bits, net.dist_bs[heads], radio)
        ok = energy[heads] >= charges[heads]
        bs_msgs += int(ok.sum())
        lost += int(senders[heads][~ok].sum())
    else:
        others = heads[heads != sup]
        charges[others] += tx_energy(bits, net.dist[others, sup], radio)
        relayed = others[energy[others] >= charges[others]]
        lost += int(senders[others].sum() - senders[relayed].sum())
        charges[sup] += len(relayed) * rx_energy(bits, radio)
        charges[sup] += aggregation_energy(bits, len(relayed), radio)
        charges[sup] += tx_energy(bits, net.dist_bs[sup], radio)
        if energy[sup] >= charges[sup]:
            bs_msgs += 1
        else:
            lost += int(senders[sup] + senders[relayed].sum())

    charges[direct] += tx_energy(bits, net.dist_bs[direct], radio)
    ok = energy[direct] >= charges[direct]
    bs_msgs += int(ok.sum())
    lost += int((~ok).sum())
    return SteadyStateOutcome(charges, bs_msgs, lost)
