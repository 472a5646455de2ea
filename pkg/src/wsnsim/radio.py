"""First-order radio energy model.

All quantities are SI: joules, metres, bits. The transmit cost switches from
the free-space (d^2) amplifier to the multipath (d^4) amplifier at the
crossover distance ``sqrt(e_fs / e_mp)``.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np


@dataclass(frozen=True)
class RadioParams:
    e_elec: float = 50e-9  # J/bit, transmitter and receiver electronics
    e_fs: float = 10e-12  # J/bit/m^2
    e_mp: float = 0.0013e-12  # J/bit/m^4
    e_da: float = 5e-9  # J/bit/message, data aggregation
    msg_bits: int = 4000
    ctrl_bits: int = 200

    def __post_init__(self):
        for name, value in asdict(self).items():
            if not value > 0:
                raise ValueError(f"{name} must be strictly positive, got {value!r}")
        if not self.e_fs > self.e_mp:
            raise ValueError("e_fs must exceed e_mp for a real crossover distance")

    @property
    def d0(self) -> float:
        return threshold_distance(self)


def threshold_distance(params: RadioParams) -> float:
    return math.sqrt(params.e_fs / params.e_mp)


def tx_energy(bits, distance, params: RadioParams):
    """Energy to transmit ``bits`` over ``distance`` metres.

    ``distance`` may be a scalar or an array; the result has the same shape.
    At exactly the crossover distance the multipath branch applies.
    """
    d0 = threshold_distance(params)
    if np.ndim(distance) == 0:
        d = float(distance)
        amp = params.e_fs * d * d if d < d0 else params.e_mp * d**4
        return bits * params.e_elec + bits * amp
    d = np.asarray(distance, dtype=float)
    amp = np.where(d < d0, params.e_fs * d * d, params.e_mp * d**4)
    return bits * params.e_elec + bits * amp


def rx_energy(bits, params: RadioParams):
    return bits * params.e_elec


def aggregation_energy(bits, n_messages, params: RadioParams):
    """Cost of fusing ``n_messages`` messages of ``bits`` each at a cluster head."""
    return bits * n_messages * params.e_da
