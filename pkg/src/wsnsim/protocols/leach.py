"""LEACH: distributed probabilistic cluster-head rotation."""
from __future__ import annotations

import math

import numpy as np

from ..radio import RadioParams, rx_energy, tx_energy
from .base import DIRECT, Network, ProtocolParams, RoundPlan

_EPS = 1e-12


def epoch_length(p: float) -> int:
    # guard against 1/p landing a hair above an integer
    return math.ceil(1.0 / p - 1e-9)


def leach_threshold(p: float, r: int, in_g: bool) -> float:
    """Election threshold T(n) for round ``r``.

    The last round of an epoch returns exactly 1 so every node still in G is
    elected; without the clamp, rounding leaves it a few ulps short.
    """
    if not in_g:
        return 0.0
    epoch = epoch_length(p)
    phase = r % epoch
    if phase == epoch - 1:
        return 1.0
    return min(1.0, p / max(1.0 - p * phase, _EPS))


def leach_elect(in_g: np.ndarray, p: float, r: int, rng: np.random.Generator) -> np.ndarray:
    """Boolean mask of nodes elected this round. One uniform draw per node."""
    draws = rng.random(len(in_g))
    return in_g & (draws < leach_threshold(p, r, True))


def nearest_head(net: Network, nodes: np.ndarray, heads: np.ndarray) -> np.ndarray:
    """Closest head for each of ``nodes``; ties go to the lowest head id."""
    heads = np.sort(heads)
    return heads[np.argmin(net.dist[np.ix_(nodes, heads)], axis=1)]


class Leach:
    name = "LEACH"

    def __init__(self, net: Network, radio: RadioParams, params: ProtocolParams, rng: np.random.Generator):
        self.net, self.radio, self.params, self.rng = net, radio, params, rng
        self.epoch = epoch_length(params.p)
        self.in_g = net.alive.copy()

    def initialize(self) -> tuple[np.ndarray, int]:
        return np.zeros(self.net.n), 0

    def elect(self, r: int) -> np.ndarray:
        net = self.net
        if r % self.epoch == 0:
            self.in_g = net.alive.copy()
        self.in_g &= net.alive
        ch = leach_elect(self.in_g, self.params.p, r, self.rng)
        self.in_g &= ~ch
        return np.flatnonzero(ch)

    def setup(self, r: int) -> RoundPlan:
        net, radio = self.net, self.radio
        plan = RoundPlan.empty(net.n)
        nodes = net.alive_ids()
        if len(nodes) == 0:
            return plan
        heads = self.elect(r)
        plan.ch_set = heads
        if len(heads) == 0:
            plan.membership[nodes] = DIRECT
            return plan
        plan.membership[nodes] = nearest_head(net, nodes, heads)
        plan.membership[heads] = heads
        ad_range = self.params.ad_range if self.params.ad_range is not None else net.diagonal
        ctrl = radio.ctrl_bits
        # every head advertises; every other alive node hears every advert
        plan.control_charges[heads] += tx_energy(ctrl, ad_range, radio)
        heard = np.full(len(nodes), len(heads)) - np.isin(nodes, heads)
        plan.control_charges[nodes] += heard * rx_energy(ctrl, radio)
        plan.ads = len(heads)
        plan.bs_control_msgs = len(heads)
        return plan


# -- FUZZY-LEACH ------------------------------------------------------------

# triangular sets (left foot, peak, right foot) on [0, 1]
LOW, MEDIUM, HIGH = (0.0, 0.0, 0.5), (0.0, 0.5, 1.0), (0.5, 1.0, 1.0)
LEVELS = (LOW, MEDIUM, HIGH)
# (energy level, centrality level) -> chance level; monotone in both inputs
RULES = {
    (0, 0): 0, (0, 1): 0, (0, 2): 1,
    (1, 0): 0, (1, 1): 1, (1, 2): 2,
    (2, 0): 1, (2, 1): 2, (2, 2): 2,
}
_UNIVERSE = np.linspace(0.0, 1.0, 201)


def triangular(x, a: float, b: float, c: float):
    x = np.asarray(x, dtype=float)
    left = np.ones_like(x) if b == a else (x - a) / (b - a)
    right = np.ones_like(x) if c == b else (c - x) / (c - b)
    return np.clip(np.minimum(left, right), 0.0, 1.0)


def fuzzy_chance(energy: float, centrality: float, mobility: float = 0.0) -> float:
    """Mamdani inference: min for AND and implication, max aggregation, centroid.

    Mobility enters every rule through its LOW set; static nodes pass 0.
    """
    e = min(max(energy, 0.0), 1.0)
    c = min(max(centrality, 0.0), 1.0)
    still = float(triangular(min(max(mobility, 0.0), 1.0), *LOW))
    mu_e = [float(triangular(e, *s)) for s in LEVELS]
    mu_c = [float(triangular(c, *s)) for s in LEVELS]
    agg = np.zeros_like(_UNIVERSE)
    for (ie, ic), out in RULES.items():
        w = min(mu_e[ie], mu_c[ic], still)
        if w > 0:
            agg = np.maximum(agg, np.minimum(w, triangular(_UNIVERSE, *LEVELS[out])))
    total = agg.sum()
    if total == 0:
        return 0.0
    return float((agg * _UNIVERSE).sum() / total)


class FuzzyLeach(Leach):
    """LEACH election, then a fuzzy-chosen superior head relays for all heads."""

    name = "FUZZY-LEACH"

    def setup(self, r: int) -> RoundPlan:
        plan = super().setup(r)
        heads = plan.ch_set
        if len(heads) == 0:
            return plan
        net = self.net
        if len(heads) == 1:
            plan.superior = int(heads[0])
            return plan
        chances = []
        for h in heads:
            members = np.flatnonzero((plan.membership == h) & (np.arange(net.n) != h))
            mean_d = net.dist[h, members].mean() if len(members) else 0.0
            centrality = 1.0 - mean_d / net.diagonal
            chances.append(fuzzy_chance(net.energy[h] / net.initial_energy, centrality))
        # best chance, then more energy, then lowest id
        order = np.lexsort((heads, -net.energy[heads], -np.asarray(chances)))
        plan.superior = int(heads[order[0]])
        return plan

