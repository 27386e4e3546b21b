"""Single runs and parameter sweeps with reproducibility manifests."""

from __future__ import annotations

import csv
import io
import itertools
import json
import logging
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Optional

from . import __version__
from .ants import run_ant_model
from .config import RunConfig, format_config, parse_value
from .engine import ALGORITHM, Trace
from .errors import ConfigurationError
from .impact import run_impact
from .schelling import run_schelling

log = logging.getLogger(__name__)

METRIC_COLUMNS = {
    "ant": ["cluster_count", "largest_cluster_fraction", "spatial_entropy", "items_on_grid", "items_carried"],
    "schelling": ["mean_like_fraction", "cluster_count", "largest_cluster_fraction", "moves"],
    "impact": ["minority_fraction", "mean_like_fraction", "cluster_count", "largest_cluster_fraction", "flips"],
}

METRICS_FILE = "metrics.csv"
MANIFEST_FILE = "manifest.json"
SNAPSHOT_DIR = "snapshots"


@dataclass
class RunManifest:
    config: dict
    config_text: str
    toolkit_version: str
    rng_algorithm: str
    start_tick: int
    end_tick: int
    converged: Optional[bool]
    files: list
    final_metrics: dict

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True) + "\n"


def format_number(value) -> str:
    """Shortest round-trip decimal; blank for an undefined metric."""
    if value is None:
        return ""
    if isinstance(value, bool):
        return str(int(value))
    if isinstance(value, float):
        return repr(value)
    return str(value)


def simulate(config: RunConfig) -> tuple[Trace, dict]:
    params = config.model_params()
    state: dict = {}
    if config.model == "ant":
        trace = run_ant_model(params, config.seed, config.ticks, config.snapshot_every, final_state=state)
    elif config.model == "schelling":
        trace = run_schelling(params, config.seed, config.ticks, config.snapshot_every, final_state=state)
    else:
        trace = run_impact(params, config.seed, config.ticks, config.snapshot_every, final_state=state)
    return trace, state


def metrics_csv(trace: Trace, columns: list[str]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["tick", *columns])
    for entry in trace:
        writer.writerow([entry.tick, *(format_number(entry.metrics.get(c)) for c in columns)])
    return buf.getvalue()


def _write(path: str, text: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def snapshot_name(tick: int) -> str:
    return f"{SNAPSHOT_DIR}/tick_{tick:08d}.pgrid"


def run_experiment(config: RunConfig, figures: bool = False) -> RunManifest:
    """Run one configuration and write metrics, snapshots and the manifest."""
    out = config.resolved_output_dir()
    try:
        os.makedirs(os.path.join(out, SNAPSHOT_DIR), exist_ok=True)
        probe = os.path.join(out, MANIFEST_FILE)
        with open(probe, "a", encoding="utf-8"):
            pass
    except OSError as exc:
        raise RuntimeError(f"output directory {out!r} is not writable: {exc}") from exc

    try:
        trace, state = simulate(config)
    except ConfigurationError as exc:
        raise ConfigurationError(f"{config.model} run (seed {config.seed}): {exc}") from exc

    columns = METRIC_COLUMNS[config.model]
    files = [METRICS_FILE]
    _write(os.path.join(out, METRICS_FILE), metrics_csv(trace, columns))
    for entry in trace:
        name = snapshot_name(entry.tick)
        _write(os.path.join(out, name), entry.to_text())
        files.append(name)
    if figures:
        from .plotting import render_run_figures

        files.extend(render_run_figures(trace, columns, out, config.model))

    final = trace.last.metrics
    manifest = RunManifest(
        config=config.flat(),
        config_text=format_config(config),
        toolkit_version=__version__,
        rng_algorithm=ALGORITHM,
        start_tick=trace[0].tick,
        end_tick=trace.last.tick,
        converged=state.get("converged"),
        files=files,
        final_metrics={c: final.get(c) for c in columns},
    )
    _write(os.path.join(out, MANIFEST_FILE), manifest.to_json())
    log.info("%s run seed=%d wrote %d files to %s", config.model, config.seed, len(files), out)
    return manifest


# --- sweeps ----------------------------------------------------------------

SUMMARY_FILE = "summary.csv"
SWEEP_MANIFEST_FILE = "sweep_manifest.json"


@dataclass
class SweepRow:
    run: int
    values: tuple
    seed: int
    status: str = "ok"
    error: str = ""
    metrics: dict = field(default_factory=dict)


def parse_grid_spec(specs: list[str]) -> dict:
    """``["schelling.vacancy_fraction=0.1,0.2", ...]`` -> ``{key: [values]}``."""
    grid: dict = {}
    for spec in specs:
        name, eq, raw = spec.partition("=")
        name = name.strip()
        if not eq or not raw.strip():
            raise ConfigurationError(f"--param expects section.key=v1,v2,..., got {spec!r}")
        if name in grid:
            raise ConfigurationError(f"parameter {name!r} given twice")
        if name == "run.seed":
            raise ConfigurationError("run.seed is set per replicate; vary it with --replicates")
        grid[name] = [parse_value(name, v) for v in raw.split(",")]
    return grid


def _run_point(job):
    base, overrides, seed, out_dir = job
    try:
        config = base.with_overrides({**overrides, "run.seed": seed, "run.output_dir": out_dir})
        manifest = run_experiment(config)
        return "ok", "", manifest.final_metrics
    except Exception as exc:  # recorded per row; the sweep goes on
        return "error", f"{type(exc).__name__}: {exc}", {}


def sweep(base: RunConfig, grid: dict, replicates: int = 1, jobs: int = 1) -> tuple[str, list[SweepRow]]:
    """Run every grid point ``replicates`` times; replicate r uses seed base + r.

    Returns the summary CSV text (also written to the base output directory)
    and its rows.  Rows follow grid order whatever order the runs finish in.
    """
    if not grid or any(not values for values in grid.values()):
        raise ConfigurationError("empty parameter grid")
    if replicates < 1:
        raise ConfigurationError("replicates must be >= 1")
    for name in grid:
        section = name.partition(".")[0]
        if section not in ("run", base.model):
            raise ConfigurationError(f"key {name!r} does not belong to model {base.model!r}")

    out = base.resolved_output_dir()
    os.makedirs(out, exist_ok=True)
    keys = list(grid)
    rows, jobs_list = [], []
    for values in itertools.product(*(grid[k] for k in keys)):
        for r in range(replicates):
            seed = (base.seed + r) & ((1 << 64) - 1)
            run = len(rows)
            rows.append(SweepRow(run, values, seed))
            # absolute so the env override is applied exactly once
            jobs_list.append((base, dict(zip(keys, values)), seed, os.path.abspath(os.path.join(out, f"run_{run:04d}"))))

    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_run_point, jobs_list))
    else:
        results = [_run_point(j) for j in jobs_list]
    for row, (status, error, metrics) in zip(rows, results):
        row.status, row.error, row.metrics = status, error, metrics

    columns = METRIC_COLUMNS[base.model]
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["run", *keys, "seed", "status", "error", *columns])
    for row in rows:
        writer.writerow([
            row.run,
            *(format_number(v) for v in row.values),
            row.seed,
            row.status,
            row.error,
            *(format_number(row.metrics.get(c)) for c in columns),
        ])
    text = buf.getvalue()
    _write(os.path.join(out, SUMMARY_FILE), text)
    sweep_manifest = {
        "base_config": format_config(base),
        "grid": {k: [format_number(v) for v in vs] for k, vs in grid.items()},
        "replicates": replicates,
        "toolkit_version": __version__,
        "rng_algorithm": ALGORITHM,
        "files": [SUMMARY_FILE] + [f"run_{row.run:04d}/{MANIFEST_FILE}" for row in rows if row.status == "ok"],
    }
    _write(os.path.join(out, SWEEP_MANIFEST_FILE), json.dumps(sweep_manifest, indent=2, sort_keys=True) + "\n")
    return text, rows
