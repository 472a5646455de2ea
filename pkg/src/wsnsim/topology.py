"""Sensor field generation and base-station placement."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .rng import stream


@dataclass
class Node:
    id: int
    x: float
    y: float
    energy: float
    alive: bool = True


@dataclass(frozen=True)
class FieldConfig:
    n_nodes: int = 500
    width: float = 100.0
    height: float = 100.0
    initial_energy: float = 0.5
    rng_seed: int = 0

    def __post_init__(self):
        if self.n_nodes < 2:
            raise ValueError(f"n_nodes must be at least 2, got {self.n_nodes}")
        if not (self.width > 0 and self.height > 0):
            raise ValueError("width and height must be positive")
        if self.initial_energy < 0:
            raise ValueError("initial_energy must be non-negative")


def place_nodes(cfg: FieldConfig) -> np.ndarray:
    """(n_nodes, 2) array of uniformly drawn coordinates."""
    rng = stream(cfg.rng_seed, "placement")
    x = rng.uniform(0.0, cfg.width, cfg.n_nodes)
    y = rng.uniform(0.0, cfg.height, cfg.n_nodes)
    return np.column_stack([x, y])


def generate_field(cfg: FieldConfig) -> list[Node]:
    pos = place_nodes(cfg)
    e = float(cfg.initial_energy)
    return [Node(i, float(px), float(py), e, e > 0) for i, (px, py) in enumerate(pos)]


def base_station_position(cfg: FieldConfig) -> tuple[float, float]:
    # centred horizontally, three quarters of a field height above the top edge
    return (0.5 * cfg.width, 0.75 * cfg.height + cfg.height)


def distance(a, b) -> float:
    return math.hypot(a[0] - b[0], a[1] - b[1])
