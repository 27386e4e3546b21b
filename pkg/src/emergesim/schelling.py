"""Schelling's segregation model on a lattice.

Residents of two colors look at their eight Moore neighbors.  Under the
threshold table a resident with ``n`` occupied neighbors stays when at least
``r(n)`` of them share its color: r(2)=1, r(3..5)=2, r(6..8)=3, and
r(0)=r(1)=0.  The fraction rule instead compares the like-neighbor fraction
with a preference ``p``.  A checkerboard satisfies every resident under the
table, so the integrated layout is a fixed point until it is perturbed.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from .emergence import cluster_summary, detect_clusters, like_counts, mean_like_neighbor_fraction
from .engine import (
    MOORE,
    TOROIDAL,
    GridWorld,
    Position,
    RngStream,
    Trace,
    neighbor_table,
    random_permutation,
    record_snapshot,
    sample_without_replacement,
    uniform_index,
)
from .errors import ConfigurationError

VACANT = 0
BLACK = 1
WHITE = 2
SYMBOLS = {VACANT: ".", BLACK: "B", WHITE: "W"}

THRESHOLD = "threshold"
FRACTION = "fraction"
NEAREST = "nearest"
RANDOM = "random"


@dataclass(frozen=True)
class RuleVariant:
    kind: str = THRESHOLD
    preference: float = 0.5  # fraction rule only

    def __post_init__(self):
        if self.kind not in (THRESHOLD, FRACTION):
            raise ConfigurationError(f"unknown rule {self.kind!r}")
        if not 0.0 <= self.preference <= 1.0:
            raise ConfigurationError("preference must lie in [0, 1]")

    def satisfied(self, same: int, total: int) -> bool:
        if self.kind == THRESHOLD:
            return same >= required_same(total)
        return total == 0 or same / total >= self.preference


def required_same(total: int) -> int:
    if total <= 1:
        return 0
    if total == 2:
        return 1
    if total <= 5:
        return 2
    return 3


@dataclass(frozen=True)
class SchellingParams:
    width: int = 20
    height: int = 20
    boundary: str = TOROIDAL
    vacancy_fraction: float = 0.1
    rule: RuleVariant = field(default_factory=RuleVariant)
    relocation: str = NEAREST
    perturb_fraction: float = 0.05

    def __post_init__(self):
        if not 0.0 <= self.vacancy_fraction < 1.0:
            raise ConfigurationError("schelling.vacancy_fraction must lie in [0, 1)")
        if not 0.0 <= self.perturb_fraction <= 1.0:
            raise ConfigurationError("schelling.perturb_fraction must lie in [0, 1]")
        if self.relocation not in (NEAREST, RANDOM):
            raise ConfigurationError(f"schelling.relocation must be {NEAREST!r} or {RANDOM!r}")


def _resident(world: GridWorld, pos) -> int:
    color = world[pos]
    if color == VACANT:
        raise ValueError(f"no resident at {tuple(pos)}")
    return color


def like_fraction(world: GridWorld, pos) -> tuple[int, int, Optional[float]]:
    """(same, occupied, same/occupied) over the Moore neighbors; vacancies ignored."""
    _resident(world, pos)
    same, total = like_counts(world, pos)
    return same, total, (same / total if total else None)


def is_satisfied(world: GridWorld, pos, rule: RuleVariant) -> bool:
    _resident(world, pos)
    return rule.satisfied(*like_counts(world, pos))


class _Lattice:
    """Flat-list working copy of a world for the sweep's inner loops."""

    def __init__(self, world: GridWorld):
        self.world = world
        self.w, self.h = world.width, world.height
        self.torus = world.boundary == TOROIDAL
        self.table = neighbor_table(self.w, self.h, world.boundary, MOORE)
        self.flat = world.cells.reshape(-1).tolist()

    def counts(self, i: int, color: int) -> tuple[int, int]:
        flat = self.flat
        same = total = 0
        for nb in self.table[i]:
            v = flat[nb]
            if v:
                total += 1
                if v == color:
                    same += 1
        return same, total

    def distance(self, i: int, j: int) -> int:
        w, h = self.w, self.h
        dx, dy = abs(i % w - j % w), abs(i // w - j // w)
        if self.torus:
            dx = min(dx, w - dx)
            dy = min(dy, h - dy)
        return max(dx, dy)

    def relocation(self, i: int, rule: RuleVariant, rng: RngStream, policy: str) -> Optional[int]:
        flat = self.flat
        color = flat[i]
        flat[i] = VACANT
        try:
            good = [v for v in range(len(flat)) if flat[v] == VACANT and v != i and rule.satisfied(*self.counts(v, color))]
        finally:
            flat[i] = color
        if not good:
            return None
        if policy == NEAREST:
            dist = [self.distance(i, v) for v in good]
            best = min(dist)
            good = [v for v, d in zip(good, dist) if d == best]
        return good[uniform_index(rng, len(good))]

    def commit(self) -> None:
        self.world.cells.reshape(-1)[:] = self.flat


def find_relocation(
    world: GridWorld, pos, rule: RuleVariant, rng: RngStream, policy: str = NEAREST
) -> Optional[Position]:
    """Vacancy where the resident at ``pos`` would be satisfied, or None.

    Every vacancy is scored with the origin treated as vacant.  ``nearest``
    keeps the satisfying vacancies at minimal Chebyshev distance and
    ``random`` keeps them all; one is then drawn uniformly from the row-major
    list.
    """
    _resident(world, pos)
    lat = _Lattice(world)
    target = lat.relocation(world.index(pos), rule, rng, policy)
    return None if target is None else world.position(target)


def schelling_sweep(world: GridWorld, params: SchellingParams, rng: RngStream) -> tuple[GridWorld, int]:
    """Activate every resident once in random order; returns (world, moves)."""
    lat = _Lattice(world)
    flat = lat.flat
    residents = [i for i, v in enumerate(flat) if v]
    rule = params.rule
    moves = 0
    for k in random_permutation(rng, len(residents)):
        i = residents[k]
        if rule.satisfied(*lat.counts(i, flat[i])):
            continue
        target = lat.relocation(i, rule, rng, params.relocation)
        if target is None:
            continue
        flat[target], flat[i] = flat[i], VACANT
        residents[k] = target
        moves += 1
    lat.commit()
    return world, moves


def integrated_initial(params: SchellingParams, rng: RngStream) -> GridWorld:
    """Checkerboard of both colors with a seeded random set of cells cleared."""
    if params.width % 2 or params.height % 2:
        raise ConfigurationError("checkerboard start needs even width and height")
    world = GridWorld(params.width, params.height, params.boundary, symbols=dict(SYMBOLS))
    for pos in world.positions():
        world[pos] = BLACK if (pos.x + pos.y) % 2 == 0 else WHITE
    flat = world.cells.reshape(-1)
    for i in sample_without_replacement(rng, world.size, round(params.vacancy_fraction * world.size)):
        flat[i] = VACANT
    return world


def perturb(world: GridWorld, k: int, rng: RngStream) -> GridWorld:
    """Remove ``k`` uniformly chosen residents."""
    residents = world.occupied()
    if not 0 <= k <= len(residents):
        raise ValueError(f"cannot remove {k} of {len(residents)} residents")
    for j in sample_without_replacement(rng, len(residents), k):
        world[residents[j]] = VACANT
    return world


def color_counts(world: GridWorld) -> dict:
    return {"black": int((world.cells == BLACK).sum()), "white": int((world.cells == WHITE).sum())}


def schelling_metrics(world: GridWorld, moves: Optional[int] = None) -> dict:
    residents = int((world.cells != VACANT).sum())
    metrics = cluster_summary(detect_clusters(world), residents)
    try:
        metrics["mean_like_fraction"] = mean_like_neighbor_fraction(world)
    except ValueError:
        metrics["mean_like_fraction"] = None
    metrics["moves"] = moves
    return metrics


def run_schelling(
    params: SchellingParams,
    seed: int,
    sweeps: int,
    snapshot_every: int,
    final_state: Optional[dict] = None,
) -> Trace:
    """Checkerboard start, perturbation, then sweeps until no one moves.

    Snapshots are taken every ``snapshot_every`` sweeps; the sweep at which
    the world stops changing is always recorded and ends the run.
    """
    if sweeps < 0 or snapshot_every < 1:
        raise ConfigurationError("sweeps must be >= 0 and snapshot_every >= 1")
    rng = RngStream(seed)
    world = integrated_initial(params, rng)
    perturb(world, round(params.perturb_fraction * len(world.occupied())), rng)
    trace = record_snapshot(world, 0, schelling_metrics(world), Trace())
    converged = False
    for sweep in range(1, sweeps + 1):
        _, moves = schelling_sweep(world, params, rng)
        converged = moves == 0
        if converged or sweep % snapshot_every == 0:
            record_snapshot(world, sweep, schelling_metrics(world, moves), trace)
        if converged:
            break
    if final_state is not None:
        final_state.update(world=world, converged=converged)
    return trace
