"""Dynamic social impact on a fully occupied lattice.

Each individual holds a binary attitude and fixed persuasiveness and
supportiveness strengths.  Opposing individuals exert persuasive impact
``sum p_j / d_ij**e`` and like-minded ones supportive impact
``s_i + sum s_j / d_ij**e`` (self-support at distance 1); an individual flips
when persuasion strictly exceeds support.  Distances are Euclidean with the
minimum-image convention on a torus.  Updates are synchronous.

The paper describing the phenomenon gives no equations for this model; the
form above is the usual Nowak-Latane one and is an implementation choice.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Optional

import numpy as np

from .emergence import cluster_summary, detect_clusters, mean_like_neighbor_fraction
from .engine import TOROIDAL, GridWorld, RngStream, Trace, record_snapshot, sample_without_replacement
from .errors import ConfigurationError

PRO = 1
CON = -1
SYMBOLS = {0: ".", PRO: "+", CON: "-"}


@dataclass(frozen=True)
class ImpactParams:
    width: int = 20
    height: int = 20
    boundary: str = TOROIDAL
    minority_fraction: float = 0.3
    distance_exponent: float = 2.0
    p_max: float = 1.0
    s_max: float = 1.0

    def __post_init__(self):
        if self.distance_exponent < 0:
            raise ConfigurationError("impact.distance_exponent must be >= 0")
        if self.p_max <= 0 or self.s_max <= 0:
            raise ConfigurationError("impact.p_max and impact.s_max must be > 0")
        if not 0.0 <= self.minority_fraction <= 0.5:
            raise ConfigurationError("impact.minority_fraction must lie in [0, 0.5]")


@dataclass
class SocialWorld:
    """Attitudes on the grid (+1 / -1, 0 for an empty cell) plus per-cell strengths."""

    grid: GridWorld
    persuasiveness: np.ndarray
    supportiveness: np.ndarray


@lru_cache(maxsize=16)
def _weights(width: int, height: int, boundary: str, exponent: float) -> np.ndarray:
    idx = np.arange(width * height)
    x, y = idx % width, idx // width
    dx = np.abs(x[:, None] - x[None, :]).astype(float)
    dy = np.abs(y[:, None] - y[None, :]).astype(float)
    if boundary == TOROIDAL:
        dx = np.minimum(dx, width - dx)
        dy = np.minimum(dy, height - dy)
    d = np.hypot(dx, dy)
    np.fill_diagonal(d, 1.0)
    w = d ** -exponent
    np.fill_diagonal(w, 0.0)
    w.setflags(write=False)
    return w


def _net(world: SocialWorld, params: ImpactParams, rows) -> np.ndarray:
    g = world.grid
    w = _weights(g.width, g.height, g.boundary, float(params.distance_exponent))[rows]
    a = g.cells.reshape(-1).astype(np.int64)
    p = world.persuasiveness.reshape(-1)
    s = world.supportiveness.reshape(-1)
    agree = a[rows][:, None] * a[None, :]
    persuade = (w * np.where(agree < 0, p, 0.0)).sum(axis=1)
    support = (w * np.where(agree > 0, s, 0.0)).sum(axis=1)
    return persuade - (s[rows] + support)


def net_impact(world: SocialWorld, pos, params: ImpactParams) -> float:
    """Persuasive minus supportive impact on the individual at ``pos``."""
    if world.grid[pos] == 0:
        raise ValueError(f"no individual at {tuple(pos)}")
    return float(_net(world, params, np.array([world.grid.index(pos)]))[0])


def impact_sweep(world: SocialWorld, params: ImpactParams) -> tuple[SocialWorld, int]:
    """Synchronous update: flip everyone whose net impact is > 0."""
    flat = world.grid.cells.reshape(-1)
    occupied = np.flatnonzero(flat)
    flip = occupied[_net(world, params, occupied) > 0]
    flat[flip] = -flat[flip]
    return world, int(flip.size)


def minority_fraction(grid: GridWorld) -> float:
    pro = int((grid.cells == PRO).sum())
    con = int((grid.cells == CON).sum())
    if pro + con == 0:
        raise ValueError("minority fraction undefined: empty world")
    return min(pro, con) / (pro + con)


def random_initial(params: ImpactParams, rng: RngStream) -> SocialWorld:
    """All cells occupied; exactly round(minority_fraction * N) start at -1.

    Strengths are uniform on (0, p_max] and (0, s_max], drawn row-major.
    """
    grid = GridWorld(params.width, params.height, params.boundary, symbols=dict(SYMBOLS))
    n = grid.size
    flat = grid.cells.reshape(-1)
    flat[:] = PRO
    flat[sample_without_replacement(rng, n, round(params.minority_fraction * n))] = CON
    p = np.array([params.p_max * (1.0 - rng.random()) for _ in range(n)])
    s = np.array([params.s_max * (1.0 - rng.random()) for _ in range(n)])
    shape = grid.cells.shape
    return SocialWorld(grid, p.reshape(shape), s.reshape(shape))


def impact_metrics(world: SocialWorld, flips: Optional[int] = None) -> dict:
    g = world.grid
    metrics = cluster_summary(detect_clusters(g), int((g.cells != 0).sum()))
    metrics["minority_fraction"] = minority_fraction(g)
    try:
        metrics["mean_like_fraction"] = mean_like_neighbor_fraction(g)
    except ValueError:
        metrics["mean_like_fraction"] = None
    metrics["flips"] = flips
    return metrics


def run_impact(
    params: ImpactParams,
    seed: int,
    sweeps: int,
    snapshot_every: int,
    final_state: Optional[dict] = None,
) -> Trace:
    """Random start, then synchronous sweeps until nobody flips."""
    if sweeps < 0 or snapshot_every < 1:
        raise ConfigurationError("sweeps must be >= 0 and snapshot_every >= 1")
    rng = RngStream(seed)
    world = random_initial(params, rng)
    trace = record_snapshot(world.grid, 0, impact_metrics(world), Trace())
    converged = False
    for sweep in range(1, sweeps + 1):
        _, flips = impact_sweep(world, params)
        converged = flips == 0
        if converged or sweep % snapshot_every == 0:
            record_snapshot(world.grid, sweep, impact_metrics(world, flips), trace)
        if converged:
            break
    if final_state is not None:
        final_state.update(world=world, converged=converged)
    return trace
