from .aro_wsn import AroWsn
from .base import DIRECT, IDLE, Network, ProtocolParams, RoundPlan, network_mean_energy, steady_state
from .kmeans import KMeans, lloyd
from .leach import FuzzyLeach, Leach, fuzzy_chance, leach_elect, leach_threshold
from .leach_c import LeachC, anneal_heads, exhaustive_heads

# protocol name -> (class, random stream)
REGISTRY = {
    "ARO-WSN": (AroWsn, "aro"),
    "LEACH": (Leach, "leach"),
    "LEACH-C": (LeachC, "leach_c"),
    "KMEANS": (KMeans, "kmeans"),
    "FUZZY-LEACH": (FuzzyLeach, "leach"),
}
PROTOCOLS = tuple(REGISTRY)

_ALIASES = {name.replace("-", "").replace("_", "").lower(): name for name in REGISTRY}
_ALIASES.update({"aro": "ARO-WSN", "fuzzy": "FUZZY-LEACH", "k-means": "KMEANS"})


def canonical_name(name: str) -> str:
    key = name.replace("-", "").replace("_", "").lower()
    try:
        return _ALIASES[key]
    except KeyError:
        raise ValueError(f"unknown protocol {name!r}; choose from {', '.join(PROTOCOLS)}") from None


__all__ = [
    "DIRECT",
    "IDLE",
    "PROTOCOLS",
    "REGISTRY",
    "AroWsn",
    "FuzzyLeach",
    "KMeans",
    "Leach",
    "LeachC",
    "Network",
    "ProtocolParams",
    "RoundPlan",
    "anneal_heads",
    "canonical_name",
    "exhaustive_heads",
    "fuzzy_chance",
    "leach_elect",
    "leach_threshold",
    "lloyd",
    "network_mean_energy",
    "steady_state",
]
