"""Named experiment sweeps with multi-seed averaging and file outputs."""
from __future__ import annotations

import csv
import io
import json
import math
import tempfile
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import plotting
from .config import Settings, with_overrides
from .engine import run_many
from .protocols import PROTOCOLS, canonical_name

AGGREGATE_COLUMNS = ("protocol", "grid_value", "fnd_mean", "fnd_std", "lnd_mean", "lnd_std", "seeds")
INDEX_COLUMNS = ("protocol", "grid_value", "seed", "fnd", "lnd", "truncated", "file")
CURVE_COLUMNS = ("protocol", "round", "alive_mean", "residual_j_mean", "bs_msgs_cum_mean")

# name -> (swept key, default grid, protocols, figure analog)
EXPERIMENTS = {
    "density": ("n_nodes", (100, 200, 300, 400, 500), PROTOCOLS, "FND and LND versus node count"),
    "lifetime": (None, (None,), PROTOCOLS, "alive nodes versus round"),
    "energy_curve": (None, (None,), PROTOCOLS, "residual energy versus round"),
    "bs_messages": (None, (None,), PROTOCOLS, "cumulative base-station messages versus round"),
    "initial_energy": ("initial_energy", (0.25, 0.5, 0.75, 1.0), PROTOCOLS, "FND and LND versus initial energy"),
    "message_size": ("msg_bits", (2000, 4000, 6000, 8000), PROTOCOLS, "FND and LND versus message size"),
    "threshold_c": ("merge_threshold", (0.5, 1.0, 1.5, 2.0, 2.5), ("ARO-WSN",), "ARO-WSN FND versus merge threshold"),
}
CURVES = {"lifetime": "alive", "energy_curve": "residual_j", "bs_messages": "bs_msgs_cum"}


class UsageError(ValueError):
    pass


@dataclass(frozen=True)
class ExperimentSpec:
    name: str
    protocols: tuple[str, ...]
    variable: str | None
    grid: tuple
    seeds: tuple[int, ...]
    out_dir: Path = field(default=Path("results"))

    def __post_init__(self):
        if self.name not in EXPERIMENTS:
            raise UsageError(f"unknown experiment {self.name!r}; choose from {', '.join(EXPERIMENTS)}")
        if not self.grid:
            raise UsageError("grid must not be empty")
        if not self.seeds:
            raise UsageError("seeds must not be empty")
        if not self.protocols:
            raise UsageError("protocol list must not be empty")
        try:
            object.__setattr__(self, "protocols", tuple(canonical_name(p) for p in self.protocols))
        except ValueError as exc:
            raise UsageError(str(exc)) from None


def default_spec(name: str, settings: Settings, seeds: int | None = None, protocols=None, grid=None,
                 out_dir="results") -> ExperimentSpec:
    if name not in EXPERIMENTS:
        raise UsageError(f"unknown experiment {name!r}; choose from {', '.join(EXPERIMENTS)}")
    variable, default_grid, default_protocols, _ = EXPERIMENTS[name]
    return ExperimentSpec(
        name,
        tuple(protocols or default_protocols),
        variable,
        tuple(grid if grid is not None else default_grid),
        tuple(settings.seed_list(seeds)),
        Path(out_dir),
    )


@dataclass
class Summary:
    rows: list[dict]
    runs: dict  # (protocol, grid_value, seed) -> SimResult
    directory: Path | None = None


def _grid_settings(spec: ExperimentSpec, settings: Settings, value) -> Settings:
    if spec.variable is None:
        return settings
    return with_overrides(settings, **{spec.variable: value})


def _stats(values: list) -> tuple[float, float]:
    if any(v is None for v in values):
        return math.nan, math.nan
    arr = np.asarray(values, dtype=float)
    std = float(arr.std(ddof=1)) if len(arr) > 1 else 0.0
    return float(arr.mean()), std


def aggregate(index_rows) -> list[dict]:
    """Per (protocol, grid value) FND/LND mean and sample deviation.

    ``index_rows`` carry protocol, grid_value, fnd and lnd; the result is a
    pure function of them, in first-seen order.
    """
    groups: dict[tuple, list] = {}
    for row in index_rows:
        groups.setdefault((row["protocol"], row["grid_value"]), []).append(row)
    out = []
    for (proto, gv), rows in groups.items():
        fm, fs = _stats([r["fnd"] for r in rows])
        lm, ls = _stats([r["lnd"] for r in rows])
        out.append(dict(protocol=proto, grid_value=gv, fnd_mean=fm, fnd_std=fs, lnd_mean=lm, lnd_std=ls,
                        seeds=len(rows)))
    return out


def mean_curve(results, column: str, length: int | None = None) -> np.ndarray:
    """Seed-average of a per-round column, each run held at its final value
    after it ends (alive stays 0, counters stay flat)."""
    results = list(results)
    length = length or max(len(r.rounds) for r in results)
    acc = np.zeros(length)
    for r in results:
        series = getattr(r, column)
        if len(series) == 0:
            pad = 0.0 if column != "residual_j" else r.manifest["initial_total_j"]
            acc += pad
            continue
        acc[: len(series)] += series[:length]
        acc[len(series):] += series[-1]
    return acc / len(results)


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return "nan" if math.isnan(v) else repr(v)
    return str(v)


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_fmt(row[c]) for c in header])
    return buf.getvalue()


def _fresh_dir(base: Path, name: str) -> Path:
    root = base / name
    root.mkdir(parents=True, exist_ok=True)
    stamp = time.strftime("%Y%m%dT%H%M%S")
    target = root / stamp
    n = 1
    while target.exists():
        n += 1
        target = root / f"{stamp}-{n}"
    target.mkdir()
    latest = root / "latest"
    if latest.is_symlink() or latest.exists():
        latest.unlink()
    try:
        latest.symlink_to(target.name, target_is_directory=True)
    except OSError:
        pass  # filesystems without symlinks still get the timestamped copy
    return target


def run_experiment(spec: ExperimentSpec, settings: Settings, write: bool = True, workers: int | None = None) -> Summary:
    jobs = []
    for pi, proto in enumerate(spec.protocols):
        for gi, value in enumerate(spec.grid):
            cfg = _grid_settings(spec, settings, value).sim
            for si, seed in enumerate(spec.seeds):
                jobs.append(((pi, gi, si), proto, cfg, seed))
    results = run_many(jobs, workers)
    runs = {}
    index = []
    for (pi, gi, si), res in results:
        proto, value, seed = spec.protocols[pi], spec.grid[gi], spec.seeds[si]
        runs[(proto, value, seed)] = res
        index.append(dict(protocol=proto, grid_value=value, seed=seed, fnd=res.fnd_round, lnd=res.lnd_round,
                          truncated=int(res.truncated), file=_run_name(proto, value, seed)))
    rows = aggregate(index)
    summary = Summary(rows, runs)
    if write:
        summary.directory = write_outputs(spec, settings, summary, index)
    return summary


def _run_name(proto: str, value, seed: int) -> str:
    tag = "" if value is None else f"_{value}"
    return f"runs/{proto}{tag}_seed{seed}.csv"


def write_outputs(spec: ExperimentSpec, settings: Settings, summary: Summary, index) -> Path:
    try:
        out = _fresh_dir(Path(spec.out_dir), spec.name)
    except OSError as exc:
        raise PermissionError(f"cannot write to {spec.out_dir}: {exc.strerror}") from None
    (out / "runs").mkdir()
    for row in index:
        res = summary.runs[(row["protocol"], row["grid_value"], row["seed"])]
        (out / row["file"]).write_text(res.to_csv())
        (out / row["file"]).with_suffix(".json").write_text(_manifest_json(res.manifest))
    (out / "index.csv").write_text(_csv_text(INDEX_COLUMNS, index))
    (out / "aggregate.csv").write_text(_csv_text(AGGREGATE_COLUMNS, summary.rows))
    meta = {
        "experiment": spec.name,
        "variable": spec.variable,
        "grid": list(spec.grid),
        "protocols": list(spec.protocols),
        "seeds": list(spec.seeds),
        "config": settings.echo(),
    }
    (out / "experiment.json").write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")
    for fname, text in figures(spec, summary).items():
        (out / fname).write_text(text)
    return out


def _manifest_json(manifest: dict) -> str:
    # wall time varies run to run; keep it out of the comparable files
    stable = {k: v for k, v in manifest.items() if k != "wall_time_s"}
    return json.dumps(stable, indent=2, sort_keys=True) + "\n"


def figures(spec: ExperimentSpec, summary: Summary) -> dict[str, str]:
    title = EXPERIMENTS[spec.name][3]
    if spec.name in CURVES:
        column = CURVES[spec.name]
        ylabel = {"alive": "alive nodes", "residual_j": "residual energy (J)", "bs_msgs_cum": "messages"}[column]
        series, rows = [], []
        value = spec.grid[0]
        for proto in spec.protocols:
            res = [summary.runs[(proto, value, s)] for s in spec.seeds]
            length = max(len(r.rounds) for r in res)
            if length == 0:
                continue
            curves = {c: mean_curve(res, c, length) for c in ("alive", "residual_j", "bs_msgs_cum")}
            xs = tuple(range(1, length + 1))
            series.append(plotting.Series(proto, xs, tuple(float(v) for v in curves[column])))
            for i, r in enumerate(xs):
                rows.append(dict(protocol=proto, round=r, alive_mean=float(curves["alive"][i]),
                                 residual_j_mean=float(curves["residual_j"][i]),
                                 bs_msgs_cum_mean=float(curves["bs_msgs_cum"][i])))
        out = {"curves.csv": _csv_text(CURVE_COLUMNS, rows)}
        if series:
            out[f"{spec.name}.svg"] = plotting.line_svg(series, title, "round", ylabel)
        return out

    out = {}
    by = {(r["protocol"], r["grid_value"]): r for r in summary.rows}
    for metric in ("fnd", "lnd"):
        if spec.name == "threshold_c" and metric == "lnd":
            continue
        values = [[by[(p, g)][f"{metric}_mean"] for g in spec.grid] for p in spec.protocols]
        label = f"{metric.upper()} round"
        name = f"{spec.name}_{metric}.svg"
        if spec.name == "density":
            out[name] = plotting.bar_svg([str(g) for g in spec.grid], list(spec.protocols), values,
                                         f"{metric.upper()}: {title}", spec.variable, label)
        else:
            series = [plotting.Series(p, tuple(float(g) for g in spec.grid), tuple(v))
                      for p, v in zip(spec.protocols, values)]
            out[name] = plotting.line_svg(series, f"{metric.upper()}: {title}", spec.variable, label)
    return out


def read_index(path) -> list[dict]:
    """Load ``index.csv`` back into rows that :func:`aggregate` accepts."""
    rows = []
    with open(path, newline="") as fh:
        for raw in csv.DictReader(fh):
            gv = raw["grid_value"]
            rows.append(dict(
                protocol=raw["protocol"],
                grid_value=None if gv == "" else (int(gv) if gv.lstrip("-").isdigit() else float(gv)),
                seed=int(raw["seed"]),
                fnd=int(raw["fnd"]) if raw["fnd"] else None,
                lnd=int(raw["lnd"]) if raw["lnd"] else None,
                truncated=int(raw["truncated"]),
                file=raw["file"],
            ))
    return rows


def describe() -> str:
    width = max(map(len, EXPERIMENTS))
    lines = []
    for name, (var, grid, _, fig) in EXPERIMENTS.items():
        sweep = f"{var} in {list(grid)}" if var else "single point, per-round curves"
        lines.append(f"  {name.ljust(width)}  {fig}; {sweep}")
    return "\n".join(lines)


def writable(path) -> bool:
    """Create ``path`` if needed and prove a file can be written inside it."""
    path = Path(path)
    try:
        path.mkdir(parents=True, exist_ok=True)
        with tempfile.NamedTemporaryFile(dir=path):
            pass
    except OSError:
        return False
    return True
