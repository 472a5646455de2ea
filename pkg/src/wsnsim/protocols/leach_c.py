"""LEACH-C: base-station-driven head selection by simulated annealing."""
from __future__ import annotations

import itertools

import numpy as np
from numba import njit

from ..radio import RadioParams, rx_energy, tx_energy
from .base import Network, ProtocolParams, RoundPlan
from .leach import nearest_head


def ssd_objective(d2: np.ndarray, heads) -> float:
    """Sum over nodes of the squared distance to the closest head."""
    return float(d2[:, list(heads)].min(axis=1).sum())


@njit(cache=True)
def _rescan(d2, sel, i):
    """Closest and second-closest head slot of node ``i``."""
    b1 = np.inf
    b2 = np.inf
    s1 = -1
    s2 = -1
    for s in range(sel.shape[0]):
        v = d2[sel[s], i]
        if v < b1:
            b2, s2 = b1, s1
            b1, s1 = v, s
        elif v < b2:
            b2, s2 = v, s
    return b1, s1, b2, s2


@njit(cache=True, fastmath=True)
def _swap_cost(row, b1, b2, s1, j):
    """Objective after replacing the head in slot ``j`` by the node whose
    distances are ``row``: its own nodes fall back to their second best."""
    acc = 0.0
    for i in range(row.shape[0]):
        keep = b2[i] if s1[i] == j else b1[i]
        acc += min(row[i], keep)
    return acc


@njit(cache=True)
def _insert(row, b1, b2, s1, s2, j, stale):
    """Offer slot ``j`` at distances ``row`` to every node.

    Nodes whose best or second best was slot ``j`` come back in ``stale``
    (count returned); their entries here are garbage until rescanned.
    """
    count = 0
    for i in range(row.shape[0]):
        if s1[i] == j or s2[i] == j:
            stale[count] = i
            count += 1
        v = row[i]
        lt1 = v < b1[i]
        lt2 = v < b2[i]
        nb2 = b1[i] if lt1 else (v if lt2 else b2[i])
        ns2 = s1[i] if lt1 else (j if lt2 else s2[i])
        b1[i] = v if lt1 else b1[i]
        s1[i] = j if lt1 else s1[i]
        b2[i] = nb2
        s2[i] = ns2
    return count


@njit(cache=True)
def _best_two(d2, sel):
    n = d2.shape[0]
    b1 = np.empty(n)
    b2 = np.empty(n)
    s1 = np.empty(n, np.int64)
    s2 = np.empty(n, np.int64)
    for i in range(n):
        b1[i], s1[i], b2[i], s2[i] = _rescan(d2, sel, i)
    return b1, b2, s1, s2


@njit(cache=True)
def _mean_uphill(d2, sel, pool, out_slot, in_slot, samples):
    """Mean positive objective change over the first proposals from ``sel``."""
    b1, b2, s1, _ = _best_two(d2, sel)
    f0 = b1.sum()
    total = 0.0
    count = 0
    for m in range(min(samples, out_slot.shape[0])):
        f = _swap_cost(d2[pool[in_slot[m]]], b1, b2, s1, out_slot[m])
        if f > f0:
            total += f - f0
            count += 1
    return total / count if count else 0.0


@njit(cache=True)
def _anneal(d2, sel, pool, out_slot, in_slot, u, t0, alpha):
    """Swap-one-head annealing; ``d2`` is indexed by local node position.

    Keeps, per node, the best and second-best head distance so a proposal
    costs a single pass over the nodes.
    """
    n = d2.shape[0]
    b1, b2, s1, s2 = _best_two(d2, sel)
    f = b1.sum()
    stale_buf = np.empty(n, np.int64)
    best_f = f
    best_sel = sel.copy()
    t = t0
    for m in range(out_slot.shape[0]):
        j = out_slot[m]
        pj = in_slot[m]
        c = pool[pj]
        row = d2[c]  # symmetric; row access is cache friendly
        new_f = _swap_cost(row, b1, b2, s1, j)
        delta = new_f - f
        if delta <= 0.0 or (t > 0.0 and u[m] < np.exp(-delta / t)):
            pool[pj] = sel[j]
            sel[j] = c
            stale = _insert(row, b1, b2, s1, s2, j, stale_buf)
            for q in range(stale):
                i = stale_buf[q]
                b1[i], s1[i], b2[i], s2[i] = _rescan(d2, sel, i)
            f = new_f
            if f < best_f:
                best_f = f
                best_sel[:] = sel
        t *= alpha
    return best_sel, best_f


def anneal_heads(
    positions: np.ndarray,
    candidates: np.ndarray,
    k: int,
    rng: np.random.Generator,
    moves: int,
    final_ratio: float = 1e-4,
    d2: np.ndarray | None = None,
    accept0: float = 0.1,
    samples: int = 64,
) -> np.ndarray:
    """Pick ``k`` of ``candidates`` (indices into ``positions``) minimising the
    squared-distance objective over all of ``positions``.

    The start temperature accepts an average uphill move (estimated from the
    first ``samples`` proposals) with probability ``accept0``; cooling is
    geometric down to ``final_ratio`` of it over ``moves`` proposals. ``d2``
    may carry the precomputed squared distance matrix of ``positions``.
    """
    candidates = np.asarray(candidates, dtype=np.int64)
    if k >= len(candidates):
        return np.sort(candidates)
    if d2 is None:
        diff = positions[:, None, :] - positions[None, :, :]
        d2 = (diff**2).sum(-1)
    start = rng.permutation(len(candidates))
    sel = candidates[start[:k]].copy()
    pool = candidates[start[k:]].copy()
    out_slot = rng.integers(0, k, size=moves)
    in_slot = rng.integers(0, len(pool), size=moves)
    u = rng.random(moves)
    uphill = _mean_uphill(d2, sel, pool, out_slot, in_slot, samples)
    t0 = -uphill / np.log(accept0)
    alpha = final_ratio ** (1.0 / moves)
    best, _ = _anneal(d2, sel, pool, out_slot, in_slot, u, t0, alpha)
    return np.sort(best)


def exhaustive_heads(positions: np.ndarray, candidates, k: int) -> tuple[tuple[int, ...], float]:
    """Brute-force optimum of the same objective; small instances only."""
    diff = positions[:, None, :] - positions[None, :, :]
    d2 = (diff**2).sum(-1)
    best = min(itertools.combinations(sorted(candidates), k), key=lambda c: ssd_objective(d2, c))
    return best, ssd_objective(d2, best)


class LeachC:
    name = "LEACH-C"

    def __init__(self, net: Network, radio: RadioParams, params: ProtocolParams, rng: np.random.Generator):
        self.net, self.radio, self.params, self.rng = net, radio, params, rng

    def initialize(self) -> tuple[np.ndarray, int]:
        return np.zeros(self.net.n), 0

    def choose_heads(self, nodes: np.ndarray) -> np.ndarray:
        net = self.net
        energy = net.energy[nodes]
        cand = nodes[energy >= energy.mean()]
        if len(cand) == 0:
            # unreachable with exact means; kept for rounding pathologies
            return nodes[[int(np.argmax(energy))]]
        k = self.params.clusters_for(len(nodes))
        local = np.searchsorted(nodes, cand)
        moves = self.params.sa_moves_per_cluster * k
        d2 = net.dist2 if len(nodes) == net.n else net.dist2[np.ix_(nodes, nodes)]
        picked = anneal_heads(net.positions[nodes], local, k, self.rng, moves, d2=d2)
        return nodes[picked]

    def setup(self, r: int) -> RoundPlan:
        net, radio = self.net, self.radio
        plan = RoundPlan.empty(net.n)
        nodes = net.alive_ids()
        if len(nodes) == 0:
            return plan
        ctrl = radio.ctrl_bits
        # position/energy report from every node, then the head-id broadcast
        plan.control_charges[nodes] += tx_energy(ctrl, net.dist_bs[nodes], radio)
        plan.control_charges[nodes] += rx_energy(ctrl, radio)
        plan.bs_control_msgs = len(nodes)
        heads = self.choose_heads(nodes)
        plan.ch_set = heads
        plan.membership[nodes] = nearest_head(net, nodes, heads)
        plan.membership[heads] = heads
        return plan
