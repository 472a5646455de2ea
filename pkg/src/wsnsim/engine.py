"""Round loop, energy accounting and run records."""
from __future__ import annotations

import csv
import io
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, replace
from dataclasses import field as _field

import numpy as np

from .protocols import REGISTRY, Network, ProtocolParams, canonical_name, steady_state
from .radio import RadioParams
from .rng import stream
from .topology import FieldConfig, base_station_position, place_nodes

ROUND_COLUMNS = ("round", "alive", "residual_j", "bs_msgs_cum", "ads")


class AccountingError(AssertionError):
    """Energy was charged to a node that is already dead."""


@dataclass(frozen=True)
class SimConfig:
    field: FieldConfig = _field(default_factory=FieldConfig)
    radio: RadioParams = _field(default_factory=RadioParams)
    protocol: ProtocolParams = _field(default_factory=ProtocolParams)
    round_cap: int = 10_000

    def __post_init__(self):
        if self.round_cap < 1:
            raise ValueError("round_cap must be positive")

    def echo(self) -> dict:
        return {
            "field": asdict(self.field),
            "radio": asdict(self.radio),
            "protocol": asdict(self.protocol),
            "round_cap": self.round_cap,
        }


@dataclass
class SimResult:
    protocol: str
    seed: int
    rounds: np.ndarray
    alive: np.ndarray
    residual_j: np.ndarray
    bs_msgs_cum: np.ndarray
    ads: np.ndarray
    fnd_round: int | None
    lnd_round: int | None
    truncated: bool
    manifest: dict

    def rows(self):
        for i in range(len(self.rounds)):
            yield (
                int(self.rounds[i]),
                int(self.alive[i]),
                float(self.residual_j[i]),
                int(self.bs_msgs_cum[i]),
                int(self.ads[i]),
            )

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(ROUND_COLUMNS)
        for r, a, e, b, ad in self.rows():
            w.writerow((r, a, repr(e), b, ad))
        return buf.getvalue()

    def residual_at(self, r: int) -> float:
        """Total residual energy after round ``r`` (0 before any round)."""
        if r <= 0:
            return self.manifest["initial_total_j"]
        if len(self.rounds) == 0 or r > self.rounds[-1]:
            return float(self.residual_j[-1]) if len(self.rounds) else self.manifest["initial_total_j"]
        return float(self.residual_j[r - 1])

    def bs_msgs_at(self, r: int) -> int:
        if len(self.rounds) == 0 or r <= 0:
            return 0
        return int(self.bs_msgs_cum[min(r, len(self.rounds)) - 1])


def apply_charges(energy: np.ndarray, alive: np.ndarray, charges: np.ndarray) -> tuple[np.ndarray, float]:
    """Debit ``charges`` in place, clamping at zero.

    Returns the ids that died and the energy actually removed.
    """
    charges = np.asarray(charges, dtype=float)
    if (charges < 0).any():
        raise ValueError("charges must be non-negative")
    bad = np.flatnonzero(~alive & (charges > 0))
    if len(bad):
        raise AccountingError(f"charge applied to dead node(s) {bad[:5].tolist()}")
    prior = energy.copy()
    np.maximum(prior - charges, 0.0, out=energy)
    died = np.flatnonzero(alive & (energy <= 0.0))
    alive[died] = False
    return died, math.fsum(prior - energy)


def make_network(cfg: SimConfig, seed: int) -> Network:
    fcfg = replace(cfg.field, rng_seed=seed)
    return Network(
        place_nodes(fcfg), base_station_position(fcfg), fcfg.initial_energy, fcfg.width, fcfg.height
    )


def run_simulation(protocol: str, cfg: SimConfig, seed: int, check_plans: bool = False) -> SimResult:
    """Simulate one protocol on the topology drawn from ``seed`` until the
    last node dies or the round cap is hit."""
    name = canonical_name(protocol)
    cls, purpose = REGISTRY[name]
    started = time.perf_counter()
    net = make_network(cfg, seed)
    proto = cls(net, cfg.radio, cfg.protocol, stream(seed, purpose))
    n = net.n
    initial_total = math.fsum(net.energy)
    spent = 0.0

    rec_round, rec_alive, rec_res, rec_bs, rec_ads = [], [], [], [], []
    fnd = lnd = None
    truncated = False
    setup_bs = 0
    lost = 0
    bs_cum = 0

    if not net.alive.any():
        fnd = lnd = 0
    else:
        charges, setup_bs = proto.initialize()
        _, used = apply_charges(net.energy, net.alive, charges)
        spent += used
        r = 0
        while net.alive.any():
            if r >= cfg.round_cap:
                truncated = True
                break
            r += 1
            plan = proto.setup(r)
            if check_plans:
                plan.validate(net.alive)
            _, used = apply_charges(net.energy, net.alive, plan.control_charges)
            spent += used
            out = steady_state(plan, net, cfg.radio)
            _, used = apply_charges(net.energy, net.alive, out.charges)
            spent += used
            lost += out.lost_messages
            bs_cum += out.bs_messages
            alive_now = int(net.alive.sum())
            if fnd is None and alive_now < n:
                fnd = r
            if alive_now == 0:
                lnd = r
            rec_round.append(r)
            rec_alive.append(alive_now)
            rec_res.append(math.fsum(net.energy))
            rec_bs.append(bs_cum)
            rec_ads.append(plan.ads)

    final_total = math.fsum(net.energy)
    drift = abs((initial_total - final_total) - spent)
    if drift > 1e-12 * max(initial_total, 1e-300):
        raise AccountingError(f"energy ledger off by {drift:.3e} J")

    manifest = {
        "protocol": name,
        "seed": seed,
        "config": cfg.echo(),
        "fnd_round": fnd,
        "lnd_round": lnd,
        "truncated": truncated,
        "rounds": len(rec_round),
        "initial_total_j": initial_total,
        "charged_total_j": spent,
        "setup_bs_msgs": int(setup_bs),
        "lost_messages": int(lost),
        "mean_energy_rule": "alive nodes only",
        "wall_time_s": round(time.perf_counter() - started, 3),
    }
    partition = getattr(proto, "partition", None)
    if partition is not None:
        manifest["n_clusters"] = partition.n_clusters
    return SimResult(
        name,
        seed,
        np.array(rec_round, dtype=np.int64),
        np.array(rec_alive, dtype=np.int64),
        np.array(rec_res, dtype=float),
        np.array(rec_bs, dtype=np.int64),
        np.array(rec_ads, dtype=np.int64),
        fnd,
        lnd,
        truncated,
        manifest,
    )


def worker_count() -> int:
    avail = len(os.sched_getaffinity(0)) if hasattr(os, "sched_getaffinity") else (os.cpu_count() or 1)
    cap = os.environ.get("WSNSIM_THREADS")
    if cap:
        try:
            avail = min(avail, max(1, int(cap)))
        except ValueError:
            raise ValueError(f"WSNSIM_THREADS must be an integer, got {cap!r}") from None
    return max(1, avail)


def _job(args):
    key, protocol, cfg, seed = args
    return key, run_simulation(protocol, cfg, seed)


def run_many(jobs, workers: int | None = None) -> list[tuple[object, SimResult]]:
    """Run ``(key, protocol, cfg, seed)`` jobs; results come back sorted by key."""
    jobs = list(jobs)
    workers = worker_count() if workers is None else workers
    if workers <= 1 or len(jobs) <= 1:
        out = [_job(j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            out = list(pool.map(_job, jobs))
    return sorted(out, key=lambda kv: kv[0])
