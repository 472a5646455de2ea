import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wsnsim.protocols import (
    DIRECT,
    IDLE,
    AroWsn,
    FuzzyLeach,
    KMeans,
    Leach,
    LeachC,
    Network,
    ProtocolParams,
    RoundPlan,
    anneal_heads,
    exhaustive_heads,
    fuzzy_chance,
    leach_threshold,
    lloyd,
    network_mean_energy,
    steady_state,
)
from wsnsim.protocols.kmeans import pick_heads
from wsnsim.protocols.leach_c import ssd_objective
from wsnsim.radio import RadioParams, aggregation_energy, rx_energy, tx_energy
from wsnsim.rng import stream

R = RadioParams()
BS = (50.0, 175.0)


def net_of(points, energy=0.5):
    return Network(np.asarray(points, dtype=float), BS, energy, 100.0, 100.0)


def random_net(n=100, seed=0, energy=0.5):
    return net_of(np.random.default_rng(seed).uniform(0, 100, (n, 2)), energy)


# -- election threshold -------------------------------------------------------


def test_threshold_examples():
    assert leach_threshold(0.05, 0, True) == pytest.approx(0.05)
    assert leach_threshold(0.05, 19, True) == 1.0
    assert leach_threshold(0.05, 7, False) == 0.0


def test_threshold_wraps_each_epoch():
    assert leach_threshold(0.05, 20, True) == leach_threshold(0.05, 0, True)


def test_threshold_non_integral_inverse():
    # 1/0.3 rounds up to a 4-round epoch that still ends in certain election
    assert leach_threshold(0.3, 3, True) == 1.0
    assert 0 < leach_threshold(0.3, 2, True) <= 1.0


@given(st.floats(0.01, 0.99), st.integers(0, 500))
def test_threshold_monotone_within_epoch(p, r):
    epoch = math.ceil(1 / p - 1e-9)
    start = r - r % epoch
    values = [leach_threshold(p, start + i, True) for i in range(epoch)]
    assert all(0 <= v <= 1 for v in values)
    assert values == sorted(values)


# -- LEACH --------------------------------------------------------------------


def make(cls, net, seed=0, **params):
    purpose = {Leach: "leach", FuzzyLeach: "leach", LeachC: "leach_c", KMeans: "kmeans", AroWsn: "aro"}[cls]
    return cls(net, R, ProtocolParams(**params), stream(seed, purpose))


def test_single_node_elected_in_last_epoch_round():
    net = net_of([[10, 10], [90, 90]])
    net.alive[1] = False
    net.energy[1] = 0.0
    proto = make(Leach, net)
    plan = proto.setup(19)
    assert plan.ch_set.tolist() == [0]


def test_no_head_means_direct_to_bs():
    net = random_net(5)
    proto = make(Leach, net)
    proto.in_g[:] = False  # nobody eligible this round
    proto.epoch = 10**9  # and no epoch reset
    plan = proto.setup(1)
    assert len(plan.ch_set) == 0
    assert (plan.membership == DIRECT).all()
    assert plan.control_charges.sum() == 0


def test_leach_charges_and_nearest_head():
    net = random_net(200, seed=1)
    proto = make(Leach, net, seed=3)
    plan = proto.setup(0)
    heads = plan.ch_set
    assert len(heads) > 0
    plan.validate(net.alive)
    ad_tx = tx_energy(R.ctrl_bits, net.diagonal, R)
    for i in range(net.n):
        if i in heads:
            expected = ad_tx + (len(heads) - 1) * rx_energy(R.ctrl_bits, R)
            assert plan.membership[i] == i
        else:
            expected = len(heads) * rx_energy(R.ctrl_bits, R)
            nearest = min(heads, key=lambda h: (net.dist[i, h], h))
            assert plan.membership[i] == nearest
        assert plan.control_charges[i] == pytest.approx(expected, rel=1e-12)
    assert plan.ads == plan.bs_control_msgs == len(heads)


def test_mean_head_count_near_expected():
    net = random_net(500, seed=2)
    proto = make(Leach, net, seed=4)
    counts = [len(proto.setup(r).ch_set) for r in range(1000)]
    assert abs(np.mean(counts) - 25) <= 3


def test_every_node_elected_once_per_epoch():
    net = random_net(60, seed=5)
    proto = make(Leach, net, p=0.1, seed=6)
    for epoch in range(30):
        seen = np.zeros(60, dtype=int)
        for r in range(epoch * 10, epoch * 10 + 10):
            seen[proto.elect(r)] += 1
        assert (seen == 1).all()


# -- FUZZY-LEACH --------------------------------------------------------------


def test_fuzzy_prefers_energy():
    assert fuzzy_chance(1.0, 0.6) > fuzzy_chance(0.2, 0.6)


def test_fuzzy_chance_in_unit_interval_on_grid():
    grid = np.linspace(0, 1, 21)
    for e, c in itertools.product(grid, grid):
        assert 0.0 <= fuzzy_chance(e, c) <= 1.0


def test_full_battery_outranks_drained_at_any_centrality():
    # centroid defuzzification is not monotone everywhere, but this gap always holds
    for c in np.linspace(0, 1, 21):
        assert fuzzy_chance(1.0, c) > fuzzy_chance(0.2, c)


def test_mobility_lowers_chance():
    assert fuzzy_chance(0.8, 0.8, mobility=1.0) < fuzzy_chance(0.8, 0.8)


def mirrored_pair_net():
    # two heads in mirrored positions, each with one member at the same offset
    pts = [[30, 50], [70, 50], [30, 40], [70, 40]]
    return net_of(pts)


def test_superior_is_higher_energy_head():
    net = mirrored_pair_net()
    net.energy[:] = [0.1, 0.5, 0.5, 0.5]
    proto = make(FuzzyLeach, net)
    proto.in_g[:] = [True, True, False, False]
    plan = proto.setup(19)  # last epoch round: both eligible nodes elected
    assert plan.ch_set.tolist() == [0, 1]
    assert plan.superior == 1


def test_single_head_is_its_own_superior():
    net = net_of([[10, 10], [20, 20]])
    proto = make(FuzzyLeach, net)
    proto.in_g[:] = [False, True]
    plan = proto.setup(19)
    assert plan.ch_set.tolist() == [1] and plan.superior == 1


def test_superior_relays_all_aggregates():
    net = mirrored_pair_net()
    plan = RoundPlan.empty(4)
    plan.ch_set = np.array([0, 1])
    plan.membership[:] = [0, 1, 0, 1]
    plan.superior = 1
    out = steady_state(plan, net, R)
    b = R.msg_bits
    d = net.dist
    assert out.charges[2] == pytest.approx(tx_energy(b, d[2, 0], R))
    # head 0: one member in, aggregate, relay to head 1
    assert out.charges[0] == pytest.approx(rx_energy(b, R) + aggregation_energy(b, 2, R) + tx_energy(b, d[0, 1], R))
    # superior: own member, own aggregate, relayed aggregate, one uplink
    sup = rx_energy(b, R) + aggregation_energy(b, 2, R) + rx_energy(b, R) + aggregation_energy(b, 1, R)
    assert out.charges[1] == pytest.approx(sup + tx_energy(b, net.dist_bs[1], R))
    assert out.bs_messages == 1


# -- LEACH-C ------------------------------------------------------------------


SQUARE = np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]])


def test_square_single_head_objective():
    best, value = exhaustive_heads(SQUARE, range(4), 1)
    assert value == pytest.approx(1 + 1 + 2)
    picked = anneal_heads(SQUARE, np.arange(4), 1, np.random.default_rng(0), moves=200)
    d2 = ((SQUARE[:, None] - SQUARE[None]) ** 2).sum(-1)
    assert ssd_objective(d2, picked) == pytest.approx(4.0)


@pytest.mark.parametrize("seed", range(10))
def test_annealing_within_five_percent_of_optimum(seed):
    rng = np.random.default_rng(100 + seed)
    pts = rng.uniform(0, 100, (20, 2))
    _, best = exhaustive_heads(pts, range(20), 3)
    picked = anneal_heads(pts, np.arange(20), 3, np.random.default_rng(seed), moves=500 * 3)
    d2 = ((pts[:, None] - pts[None]) ** 2).sum(-1)
    assert ssd_objective(d2, picked) <= 1.05 * best


def test_annealing_uses_all_candidates_when_short():
    got = anneal_heads(SQUARE, np.array([2, 0]), 3, np.random.default_rng(0), moves=10)
    assert got.tolist() == [0, 2]


def test_equal_energy_makes_everyone_a_candidate():
    net = random_net(50, seed=7)
    proto = make(LeachC, net)
    heads = proto.choose_heads(net.alive_ids())
    assert len(heads) == 3  # ceil(0.05 * 50)


def test_leach_c_heads_are_above_mean_energy():
    net = random_net(80, seed=8)
    net.energy[:] = np.linspace(0.1, 0.5, 80)
    proto = make(LeachC, net)
    plan = proto.setup(1)
    assert (net.energy[plan.ch_set] >= net.energy.mean()).all()
    plan.validate(net.alive)


def test_leach_c_control_charges():
    net = random_net(40, seed=9)
    plan = make(LeachC, net).setup(1)
    expected = tx_energy(R.ctrl_bits, net.dist_bs, R) + rx_energy(R.ctrl_bits, R)
    assert np.allclose(plan.control_charges, expected, rtol=1e-12)
    assert plan.bs_control_msgs == 40 and plan.ads == 0


# -- K-means ------------------------------------------------------------------


def test_lloyd_square_fixed_point():
    # centroids on the left and right edges split the square by column
    labels, cent, _ = lloyd(SQUARE, [[0.0, 0.5], [1.0, 0.2]])
    assert labels.tolist() == [0, 1, 1, 0]
    assert cent.tolist() == [[0.0, 0.5], [1.0, 0.5]]


def test_lloyd_reseeds_empty_cluster():
    pts = np.array([[0.0, 0.0], [0.1, 0.0], [10.0, 0.0]])
    labels, cent, _ = lloyd(pts, [[0.0, 0.0], [500.0, 500.0]])
    assert sorted(np.bincount(labels).tolist()) == [1, 2]


def test_k_equals_n_gives_singletons():
    net = random_net(8, seed=10)
    plan = make(KMeans, net, k_clusters=8).setup(1)
    assert plan.ch_set.tolist() == list(range(8))
    assert (plan.membership == np.arange(8)).all()


def test_equal_positions_pick_max_energy():
    nodes = np.arange(4)
    pos = np.zeros((4, 2))
    energy = np.array([0.2, 0.4, 0.3, 0.1])
    heads = pick_heads(nodes, np.zeros(4, dtype=int), np.zeros((1, 2)), energy, pos)
    assert heads.tolist() == [1]


def test_kmeans_members_follow_their_cluster_head():
    net = random_net(120, seed=11)
    plan = make(KMeans, net).setup(1)
    plan.validate(net.alive)
    assert len(plan.ch_set) == 6
    assert plan.bs_control_msgs == 120


# -- ARO-WSN ------------------------------------------------------------------


def test_aro_initialize_charges_position_reports():
    net = random_net(60, seed=12)
    proto = make(AroWsn, net)
    charges, reports = proto.initialize()
    assert reports == 60
    assert np.allclose(charges, tx_energy(R.ctrl_bits, net.dist_bs, R))
    assert proto.partition.n_clusters >= 1


def test_aro_first_round_announces_every_head():
    net = random_net(60, seed=13)
    proto = make(AroWsn, net)
    proto.initialize()
    plan = proto.setup(1)
    assert plan.ads == proto.partition.n_clusters == len(plan.ch_set)
    plan.validate(net.alive)


def test_aro_equal_energy_never_rotates():
    net = random_net(60, seed=14)
    proto = make(AroWsn, net)
    proto.initialize()
    first = proto.setup(1).ch_set.tolist()
    for r in range(2, 10):
        plan = proto.setup(r)
        assert plan.ch_set.tolist() == first
        assert plan.ads == 0 and plan.control_charges.sum() == 0


def test_aro_head_at_exact_mean_is_kept():
    net = net_of([[10, 10], [11, 10], [12, 10]])
    proto = make(AroWsn, net, knn_k=2)
    proto.initialize()
    net.energy[:] = [0.3, 0.3, 0.3]
    plan = proto.setup(1)
    head = int(plan.ch_set[0])
    others = [i for i in range(3) if i != head]
    net.energy[others] = [0.2, 0.4]  # mean stays 0.3
    plan = proto.setup(2)
    assert plan.ch_set.tolist() == [head] and plan.ads == 0


def test_aro_rotates_below_mean():
    net = net_of([[10, 10], [11, 10], [12, 10]])
    proto = make(AroWsn, net, knn_k=2)
    proto.initialize()
    head = int(proto.setup(1).ch_set[0])
    net.energy[head] = 0.01
    plan = proto.setup(2)
    new = int(plan.ch_set[0])
    assert new != head and net.energy[new] >= net.mean_energy()
    assert plan.ads == plan.bs_control_msgs == 1
    diameter = net.dist[np.ix_([0, 1, 2], [0, 1, 2])].max()
    assert plan.control_charges[new] == pytest.approx(tx_energy(R.ctrl_bits, diameter, R))
    assert plan.control_charges[head] == pytest.approx(rx_energy(R.ctrl_bits, R))


def test_aro_single_node_cluster_is_permanent_head():
    net = net_of([[0, 0], [1, 0], [99, 99]])
    proto = make(AroWsn, net, knn_k=1)
    proto.initialize()
    lone = proto.partition.cluster_of(2)
    assert proto.partition.members(lone) == (2,)
    for r in range(1, 5):
        net.energy[2] *= 0.5  # drops far below the mean, yet stays head
        assert 2 in proto.setup(r).ch_set


def test_aro_fallback_to_richest_member():
    net = net_of([[10, 10], [11, 10], [12, 10], [90, 90], [91, 90]])
    proto = make(AroWsn, net, knn_k=1)
    proto.initialize()
    cid = proto.partition.cluster_of(0)
    members = proto.partition.members(cid)
    proto.setup(1)
    # drain this cluster so every member sits below the network mean
    net.energy[list(members)] = np.linspace(0.01, 0.02, len(members))
    plan = proto.setup(2)
    assert plan.membership[members[0]] == members[-1]


def test_aro_retires_dead_clusters():
    net = net_of([[0, 0], [1, 0], [99, 99]])
    proto = make(AroWsn, net, knn_k=1)
    proto.initialize()
    proto.setup(1)
    net.energy[2] = 0.0
    net.alive[2] = False
    plan = proto.setup(2)
    assert 2 not in plan.ch_set and plan.membership[2] == IDLE


def test_aro_no_control_charge_versus_leach():
    net = random_net(500, seed=15)
    aro = make(AroWsn, net)
    aro.initialize()
    aro.setup(1)
    steady = aro.setup(2)
    leach = make(Leach, random_net(500, seed=15)).setup(0)
    assert steady.control_charges.sum() == 0 < leach.control_charges.sum()


# -- steady state -------------------------------------------------------------


def test_steady_state_single_cluster_budget():
    # head 100 m below the base station, nine members inside 50 m
    head = np.array([[50.0, 75.0]])
    rng = np.random.default_rng(16)
    angles = rng.uniform(0, 2 * np.pi, 9)
    radii = rng.uniform(5, 49, 9)
    members = head + np.column_stack([radii * np.cos(angles), radii * np.sin(angles)])
    net = net_of(np.vstack([head, members]))
    plan = RoundPlan.empty(10)
    plan.ch_set = np.array([0])
    plan.membership[:] = 0
    out = steady_state(plan, net, R)
    b = R.msg_bits
    expected = (
        sum(tx_energy(b, r, R) for r in radii)
        + 9 * rx_energy(b, R)
        + aggregation_energy(b, 10, R)
        + tx_energy(b, 100.0, R)
    )
    assert out.charges.sum() == pytest.approx(expected, rel=1e-12)
    assert out.bs_messages == 1 and out.lost_messages == 0


def test_steady_state_nothing_alive():
    net = random_net(5)
    net.alive[:] = False
    net.energy[:] = 0
    out = steady_state(RoundPlan.empty(5), net, R)
    assert out.charges.sum() == 0 and out.bs_messages == 0


def test_members_of_dead_head_lose_data():
    net = net_of([[10, 10], [12, 10], [14, 10]])
    plan = RoundPlan.empty(3)
    plan.ch_set = np.array([0])
    plan.membership[:] = 0
    net.alive[0] = False
    net.energy[0] = 0.0
    out = steady_state(plan, net, R)
    assert out.charges[0] == 0
    assert out.charges[1] > 0 and out.lost_messages == 2 and out.bs_messages == 0


def test_direct_senders_reach_bs():
    net = net_of([[10, 10], [90, 10]])
    plan = RoundPlan.empty(2)
    plan.membership[:] = DIRECT
    out = steady_state(plan, net, R)
    assert np.allclose(out.charges, tx_energy(R.msg_bits, net.dist_bs, R))
    assert out.bs_messages == 2


def test_short_battery_loses_message():
    net = net_of([[10, 10], [90, 10]])
    net.energy[1] = 1e-6
    plan = RoundPlan.empty(2)
    plan.membership[:] = DIRECT
    out = steady_state(plan, net, R)
    assert out.bs_messages == 1 and out.lost_messages == 1


# -- mean energy and parameters -------------------------------------------------


def test_network_mean_energy_examples():
    assert network_mean_energy([0.5, 0.5, 0.5], [True] * 3) == 0.5
    assert network_mean_energy([0.2, 0.4], [True, True]) == pytest.approx(0.3)
    assert network_mean_energy([0.5, 0.0], [True, False]) == 0.5
    with pytest.raises(ValueError):
        network_mean_energy([0.0], [False])


def test_clusters_for_default_and_override():
    assert ProtocolParams().clusters_for(500) == 25
    assert ProtocolParams().clusters_for(1) == 1
    assert ProtocolParams(k_clusters=7).clusters_for(5) == 5


@pytest.mark.parametrize(
    "kwargs",
    [{"p": 0}, {"p": 1}, {"k_clusters": 0}, {"merge_threshold": -1}, {"knn_k": 0}, {"aro_distance": "x"},
     {"aro_merge": "x"}, {"knn_backend": "x"}, {"sa_moves_per_cluster": 0}],
)
def test_invalid_protocol_params(kwargs):
    with pytest.raises(ValueError):
        ProtocolParams(**kwargs)


@settings(max_examples=10, deadline=None)
@given(st.integers(0, 10**6), st.sampled_from([Leach, FuzzyLeach, LeachC, KMeans, AroWsn]))
def test_plans_map_members_to_nearest_or_fixed_head(seed, cls):
    net = random_net(40, seed=seed % 1000)
    rng = np.random.default_rng(seed)
    proto = cls(net, R, ProtocolParams(), stream(seed, "leach"))
    proto.initialize()
    for r in range(5):
        net.energy[:] = np.maximum(net.energy - rng.uniform(0, 0.01, 40), 1e-6)
        plan = proto.setup(r)
        plan.validate(net.alive)
        if cls in (Leach, FuzzyLeach, LeachC) and len(plan.ch_set):
            for i in np.flatnonzero(plan.membership >= 0):
                d = net.dist[i, plan.ch_set]
                assert net.dist[i, plan.membership[i]] == d.min() or i in plan.ch_set
