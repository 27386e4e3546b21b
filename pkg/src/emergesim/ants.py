"""Corpse clustering and sorting by memory-driven ants.

Unladen ants pick up an item with probability ``(k1 / (k1 + f))**2`` and
laden ants drop one with probability ``(f / (k2 + f))**2``, where ``f`` is
the fraction of the last ``T`` cells visited that held an item of the type
in question (Deneubourg et al., 1991).  Each tick an ant perceives only the
cell it steps onto, so at most ``T`` items can be encountered in ``T`` ticks.
With more than one item type the same rule sorts as well as clusters.
"""

from __future__ import annotations

import logging
import string
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .emergence import cluster_summary, detect_clusters, spatial_entropy
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

log = logging.getLogger(__name__)

ANT = 1000
ANT_ON_ITEM = 1001


@dataclass(frozen=True)
class AntParams:
    width: int = 50
    height: int = 50
    boundary: str = TOROIDAL
    n_ants: int = 10
    item_types: int = 1
    items_per_type: int = 200
    k1: float = 0.1
    k2: float = 0.3
    memory: int = 50
    entropy_block: int = 10

    def __post_init__(self):
        if self.k1 <= 0:
            raise ConfigurationError("ant.k1 must be > 0")
        if self.k2 <= 0:
            raise ConfigurationError("ant.k2 must be > 0")
        if self.memory < 1:
            raise ConfigurationError("ant.memory must be >= 1")
        if self.n_ants < 1:
            raise ConfigurationError("ant.n_ants must be >= 1")
        if not 1 <= self.item_types <= 26:
            raise ConfigurationError("ant.item_types must be in 1..26")
        if self.items_per_type < 0:
            raise ConfigurationError("ant.items_per_type must be >= 0")
        if self.entropy_block < 1 or self.width % self.entropy_block or self.height % self.entropy_block:
            raise ConfigurationError("ant.entropy_block must divide ant.width and ant.height")
        if self.items_per_type * self.item_types > self.width * self.height:
            raise ConfigurationError(
                f"{self.items_per_type * self.item_types} items do not fit on "
                f"{self.width}x{self.height} cells"
            )


def item_symbols(item_types: int) -> dict:
    symbols = {0: "."}
    for t in range(1, item_types + 1):
        symbols[t] = string.ascii_uppercase[t - 1]
    return symbols


@dataclass
class AntState:
    position: Position
    memory: np.ndarray  # (item_types, T) perception bits, used as a ring
    carrying: int = 0  # item type, 0 when unladen
    slot: int = 0  # next ring slot to overwrite

    @classmethod
    def fresh(cls, position, item_types: int, T: int) -> "AntState":
        return cls(Position(*position), np.zeros((item_types, T), dtype=np.uint8))

    def perceive(self, item: int) -> None:
        """Record what the entered cell held, one bit per item type."""
        col = self.memory[:, self.slot]
        col[:] = 0
        if item:
            col[item - 1] = 1
        self.slot = (self.slot + 1) % self.memory.shape[1]


def perceived_fraction(memory: np.ndarray, item_type: int) -> float:
    """Sightings of ``item_type`` in the memory window divided by the window length.

    Slots not yet written are zeros and count as no sighting.
    """
    row = memory[item_type - 1]
    return int(row.sum()) / row.shape[0]


def pickup_probability(f: float, k1: float) -> float:
    if k1 <= 0:
        raise ConfigurationError("k1 must be > 0")
    r = k1 / (k1 + f)
    return r * r


def drop_probability(f: float, k2: float) -> float:
    if k2 <= 0:
        raise ConfigurationError("k2 must be > 0")
    r = f / (k2 + f)
    return r * r


def ant_tick(world: GridWorld, ant: AntState, params: AntParams, rng: RngStream) -> None:
    """Move, perceive, then maybe pick up or drop.  Mutates ``world`` and ``ant``."""
    table = neighbor_table(world.width, world.height, world.boundary, MOORE)
    options = table[world.index(ant.position)]
    here = options[uniform_index(rng, len(options))]
    ant.position = world.position(here)
    flat = world.cells.reshape(-1)
    item = int(flat[here])
    ant.perceive(item)
    if not ant.carrying:
        if item:
            p = pickup_probability(perceived_fraction(ant.memory, item), params.k1)
            if rng.random() < p:
                ant.carrying = item
                flat[here] = 0
    elif not item:
        p = drop_probability(perceived_fraction(ant.memory, ant.carrying), params.k2)
        if rng.random() < p:
            flat[here] = ant.carrying
            ant.carrying = 0


def item_counts(world: GridWorld, ants: list[AntState], item_types: int) -> tuple[list[int], list[int]]:
    """Per-type (on-grid, carried) item counts."""
    on_grid = [int((world.cells == t).sum()) for t in range(1, item_types + 1)]
    carried = [sum(1 for a in ants if a.carrying == t) for t in range(1, item_types + 1)]
    return on_grid, carried


def display_world(world: GridWorld, ants: list[AntState]) -> GridWorld:
    """Item layer with ants overlaid: 'a' for an ant, '*' for an ant on an item."""
    shown = world.copy()
    shown.cells = shown.cells.astype(np.int16)
    for ant in ants:
        shown[ant.position] = ANT_ON_ITEM if world[ant.position] else ANT
    shown.symbols[ANT] = "a"
    shown.symbols[ANT_ON_ITEM] = "*"
    return shown


def ant_metrics(world: GridWorld, ants: list[AntState], params: AntParams) -> dict:
    on_grid, carried = item_counts(world, ants, params.item_types)
    total = sum(on_grid)
    metrics = cluster_summary(detect_clusters(world), total)
    metrics["spatial_entropy"] = spatial_entropy(world, params.entropy_block) if total else None
    metrics["items_on_grid"] = total
    metrics["items_carried"] = sum(carried)
    return metrics


def initial_state(params: AntParams, rng: RngStream) -> tuple[GridWorld, list[AntState]]:
    world = GridWorld(params.width, params.height, params.boundary, symbols=item_symbols(params.item_types))
    n_items = params.items_per_type * params.item_types
    flat = world.cells.reshape(-1)
    for k, cell in enumerate(sample_without_replacement(rng, world.size, n_items)):
        flat[cell] = 1 + k // params.items_per_type
    ants = [
        AntState.fresh(world.position(uniform_index(rng, world.size)), params.item_types, params.memory)
        for _ in range(params.n_ants)
    ]
    return world, ants


def _kernel():
    try:
        from . import _ant_kernel
    except ImportError:  # pragma: no cover - numba missing
        return None
    return _ant_kernel


class _KernelRunner:
    """Holds the ant population as flat arrays for the compiled loop."""

    def __init__(self, world, ants, params, rng, kernel):
        self.kernel = kernel
        self.world = world
        self.ants = ants
        self.params = params
        self.rng = rng
        table = neighbor_table(world.width, world.height, world.boundary, MOORE)
        self.nbr_count = np.array([len(t) for t in table], dtype=np.int64)
        self.nbr = np.zeros((len(table), 8), dtype=np.int64)
        for i, t in enumerate(table):
            self.nbr[i, : len(t)] = t
        self.items = world.cells.reshape(-1).astype(np.int64)
        self.pos = np.array([world.index(a.position) for a in ants], dtype=np.int64)
        self.carrying = np.array([a.carrying for a in ants], dtype=np.int64)
        self.mem = np.stack([a.memory for a in ants]).astype(np.int64)
        self.counts = self.mem.sum(axis=2)
        self.slot = np.array([a.slot for a in ants], dtype=np.int64)

    def advance(self, ticks: int) -> None:
        state = np.array(self.rng.getstate(), dtype=np.uint64)
        self.kernel.run_ticks(
            self.items, self.pos, self.carrying, self.mem, self.counts, self.slot,
            state, self.nbr, self.nbr_count, ticks, float(self.params.k1), float(self.params.k2),
        )
        self.rng.setstate([int(v) for v in state])
        self.world.cells[:] = self.items.reshape(self.world.cells.shape)
        for i, ant in enumerate(self.ants):
            ant.position = self.world.position(int(self.pos[i]))
            ant.carrying = int(self.carrying[i])
            ant.memory[:] = self.mem[i]
            ant.slot = int(self.slot[i])


def run_ant_model(
    params: AntParams,
    seed: int,
    ticks: int,
    snapshot_every: int,
    backend: str = "auto",
    final_state: Optional[dict] = None,
) -> Trace:
    """Scatter items and ants, run ``ticks`` rounds of every ant acting once.

    Snapshots land on every multiple of ``snapshot_every`` up to ``ticks``.
    ``backend`` is "python", "numba" or "auto"; all give identical traces.
    If ``final_state`` is a dict it receives the last world and ant list.
    """
    if ticks < 0 or snapshot_every < 1:
        raise ConfigurationError("ticks must be >= 0 and snapshot_every >= 1")
    rng = RngStream(seed)
    world, ants = initial_state(params, rng)
    trace = Trace()
    record_snapshot(display_world(world, ants), 0, ant_metrics(world, ants, params), trace)

    kernel = None if backend == "python" else _kernel()
    if backend == "numba" and kernel is None:
        raise RuntimeError("numba backend requested but numba is not importable")
    runner = _KernelRunner(world, ants, params, rng, kernel) if kernel else None

    done = 0
    while done < ticks:
        step = min(snapshot_every - done % snapshot_every, ticks - done)
        if runner is not None:
            runner.advance(step)
        else:
            for _ in range(step):
                for i in random_permutation(rng, len(ants)):
                    ant_tick(world, ants[i], params, rng)
        done += step
        if done % snapshot_every == 0:
            record_snapshot(display_world(world, ants), done, ant_metrics(world, ants, params), trace)
            log.debug("ant tick %d: %s", done, trace.last.metrics)
    if final_state is not None:
        final_state.update(world=world, ants=ants)
    return trace
