"""Shared substrate: lattice, neighborhoods, randomness and traces."""

from .grid import (
    BOUNDARIES,
    BOUNDED,
    EMPTY,
    MOORE,
    TOROIDAL,
    VON_NEUMANN,
    GridWorld,
    NeighborhoodSpec,
    Position,
    neighbor_table,
    neighborhood,
)
from .rng import (
    ALGORITHM,
    RngStream,
    random_permutation,
    sample_without_replacement,
    uniform_index,
)
from .trace import Snapshot, Trace, format_grid, parse_grid, record_snapshot

__all__ = [
    "ALGORITHM",
    "BOUNDARIES",
    "BOUNDED",
    "EMPTY",
    "MOORE",
    "TOROIDAL",
    "VON_NEUMANN",
    "GridWorld",
    "NeighborhoodSpec",
    "Position",
    "RngStream",
    "Snapshot",
    "Trace",
    "format_grid",
    "neighbor_table",
    "neighborhood",
    "parse_grid",
    "random_permutation",
    "record_snapshot",
    "sample_without_replacement",
    "uniform_index",
]
