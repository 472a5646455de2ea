"""Plain ``key = value`` configuration files.

Blank lines and ``#`` comments are ignored. Every key is optional; absent
keys keep their defaults. ``none`` clears an optional value.
"""
from __future__ import annotations

from dataclasses import dataclass, fields, replace
from pathlib import Path

from .engine import SimConfig
from .protocols import ProtocolParams
from .radio import RadioParams
from .topology import FieldConfig


class ConfigError(ValueError):
    pass


# value type per key; sections are derived from the dataclasses below
_SECTIONS = {"field": FieldConfig, "radio": RadioParams, "protocol": ProtocolParams}
_TYPES = {
    "n_nodes": int,
    "width": float,
    "height": float,
    "initial_energy": float,
    "e_elec": float,
    "e_fs": float,
    "e_mp": float,
    "e_da": float,
    "msg_bits": int,
    "ctrl_bits": int,
    "p": float,
    "k_clusters": int,
    "merge_threshold": float,
    "knn_k": int,
    "aro_distance": str,
    "aro_merge": str,
    "knn_backend": str,
    "sa_moves_per_cluster": int,
    "kmeans_tol": float,
    "kmeans_max_iter": int,
    "ad_range": float,
    "round_cap": int,
    "base_seed": int,
    "seeds": int,
}
_OPTIONAL = {"k_clusters", "ad_range"}
KEYS = {}
for _section, _cls in _SECTIONS.items():
    for _f in fields(_cls):
        if _f.name != "rng_seed":
            KEYS[_f.name] = _section
KEYS.update(round_cap="sim", base_seed="experiment", seeds="experiment")


@dataclass(frozen=True)
class Settings:
    sim: SimConfig = SimConfig()
    base_seed: int = 1
    seeds: int = 20

    def __post_init__(self):
        if not 0 <= self.base_seed < 2**64:
            raise ValueError("base_seed must be an unsigned 64-bit integer")
        if self.seeds < 1:
            raise ValueError("seeds must be positive")

    def seed_list(self, count: int | None = None) -> list[int]:
        count = self.seeds if count is None else count
        return [(self.base_seed + i) % 2**64 for i in range(count)]

    def echo(self) -> dict:
        return {**self.sim.echo(), "base_seed": self.base_seed, "seeds": self.seeds}


def _convert(key: str, raw: str):
    if key in _OPTIONAL and raw.lower() == "none":
        return None
    kind = _TYPES[key]
    if kind is int:
        return int(raw, 0)
    if kind is float:
        return float(raw)
    return raw


def parse_text(text: str, source: str = "<config>") -> Settings:
    values, lines = {}, {}
    for lineno, line in enumerate(text.splitlines(), 1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        if "=" not in body:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value', got {body!r}")
        key, raw = (part.strip() for part in body.split("=", 1))
        if key not in KEYS:
            raise ConfigError(f"{source}:{lineno}: unknown key {key!r}")
        if key in values:
            raise ConfigError(f"{source}:{lineno}: {key} already set on line {lines[key]}")
        try:
            values[key] = _convert(key, raw)
        except ValueError:
            kind = _TYPES[key].__name__
            raise ConfigError(f"{source}:{lineno}: {key} expects {kind}, got {raw!r}") from None
        lines[key] = lineno

    def build(cls, section):
        kwargs = {k: v for k, v in values.items() if KEYS[k] == section}
        try:
            return cls(**kwargs)
        except ValueError as exc:
            raise _located(exc, kwargs, lines, source) from None

    parts = {name: build(cls, name) for name, cls in _SECTIONS.items()}
    sim_kw = {k: v for k, v in values.items() if KEYS[k] == "sim"}
    exp_kw = {k: v for k, v in values.items() if KEYS[k] == "experiment"}
    try:
        sim = SimConfig(**parts, **sim_kw)
        return Settings(sim, **exp_kw)
    except ValueError as exc:
        raise _located(exc, {**sim_kw, **exp_kw}, lines, source) from None


def _located(exc: ValueError, kwargs: dict, lines: dict, source: str) -> ConfigError:
    msg = str(exc)
    named = [k for k in kwargs if k in msg]
    if named:
        key = max(named, key=len)
        return ConfigError(f"{source}:{lines[key]}: {key}: {msg}")
    return ConfigError(f"{source}: {msg}")


def parse_config(path) -> Settings:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"{path}: cannot read config ({exc.strerror})") from None
    return parse_text(text, str(path))


def dump_config(settings: Settings) -> str:
    """Render every key so the output parses back to the same settings."""
    sim = settings.sim
    out = []
    for key, section in KEYS.items():
        if section in _SECTIONS:
            value = getattr(getattr(sim, section), key)
        elif section == "sim":
            value = getattr(sim, key)
        else:
            value = getattr(settings, key)
        out.append(f"{key} = {'none' if value is None else value!r}".replace("'", ""))
    return "\n".join(out) + "\n"


def with_overrides(settings: Settings, **overrides) -> Settings:
    """Copy of ``settings`` with flat keys replaced."""
    sim = settings.sim
    parts = {name: getattr(sim, name) for name in _SECTIONS}
    sim_kw, exp_kw = {}, {}
    for key, value in overrides.items():
        if key not in KEYS:
            raise ConfigError(f"unknown key {key!r}")
        section = KEYS[key]
        if section in parts:
            parts[section] = replace(parts[section], **{key: value})
        elif section == "sim":
            sim_kw[key] = value
        else:
            exp_kw[key] = value
    return replace(settings, sim=replace(sim, **parts, **sim_kw), **exp_kw)
