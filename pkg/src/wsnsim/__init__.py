"""Round-based simulator for cluster-based wireless sensor networks."""
from .engine import SimConfig, SimResult, apply_charges, run_simulation
from .protocols import PROTOCOLS, ProtocolParams
from .radio import RadioParams
from .topology import FieldConfig

__version__ = "0.1.0"

__all__ = [
    "PROTOCOLS",
    "FieldConfig",
    "ProtocolParams",
    "RadioParams",
    "SimConfig",
    "SimResult",
    "apply_charges",
    "run_simulation",
]
