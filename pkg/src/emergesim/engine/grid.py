"""Lattice environment and neighborhoods."""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterator, NamedTuple

import numpy as np

TOROIDAL = "toroidal"
BOUNDED = "bounded"
BOUNDARIES = (TOROIDAL, BOUNDED)

EMPTY = 0


class Position(NamedTuple):
    x: int  # column
    y: int  # row


@dataclass(frozen=True)
class NeighborhoodSpec:
    kind: str = "moore"
    radius: int = 1

    def __post_init__(self):
        if self.kind not in ("moore", "von-neumann"):
            raise ValueError(f"unknown neighborhood kind {self.kind!r}")
        if self.radius < 1:
            raise ValueError("neighborhood radius must be >= 1")

    def offsets(self) -> list[tuple[int, int]]:
        r = self.radius
        out = []
        for dy in range(-r, r + 1):
            for dx in range(-r, r + 1):
                if dx == 0 and dy == 0:
                    continue
                if self.kind == "von-neumann" and abs(dx) + abs(dy) > r:
                    continue
                out.append((dx, dy))
        return out


MOORE = NeighborhoodSpec("moore", 1)
VON_NEUMANN = NeighborhoodSpec("von-neumann", 1)


@dataclass
class GridWorld:
    """A ``width`` x ``height`` lattice of integer cell codes.

    Code 0 is empty.  Models declare what the other codes mean and the
    character each renders to (``symbols``).  ``cells`` is indexed
    ``[y, x]``.
    """

    width: int
    height: int
    boundary: str = TOROIDAL
    cells: np.ndarray = None
    symbols: dict = field(default_factory=lambda: {EMPTY: "."})

    def __post_init__(self):
        if self.width < 1 or self.height < 1:
            raise ValueError("grid dimensions must be >= 1")
        if self.boundary not in BOUNDARIES:
            raise ValueError(f"boundary must be one of {BOUNDARIES}, got {self.boundary!r}")
        if self.cells is None:
            self.cells = np.zeros((self.height, self.width), dtype=np.int16)
        elif self.cells.shape != (self.height, self.width):
            raise ValueError(f"cells shape {self.cells.shape} != {(self.height, self.width)}")

    @property
    def size(self) -> int:
        return self.width * self.height

    def __getitem__(self, pos) -> int:
        return int(self.cells[pos[1], pos[0]])

    def __setitem__(self, pos, value: int) -> None:
        self.cells[pos[1], pos[0]] = value

    def contains(self, pos) -> bool:
        return 0 <= pos[0] < self.width and 0 <= pos[1] < self.height

    def positions(self) -> Iterator[Position]:
        """All positions in row-major order."""
        for y in range(self.height):
            for x in range(self.width):
                yield Position(x, y)

    def occupied(self) -> list[Position]:
        ys, xs = np.nonzero(self.cells)
        return [Position(int(x), int(y)) for y, x in zip(ys, xs)]

    def index(self, pos) -> int:
        return pos[1] * self.width + pos[0]

    def position(self, index: int) -> Position:
        return Position(index % self.width, index // self.width)

    def copy(self) -> "GridWorld":
        return GridWorld(self.width, self.height, self.boundary, self.cells.copy(), dict(self.symbols))

    def render(self) -> list[str]:
        lookup = self.symbols
        return ["".join(lookup[int(v)] for v in row) for row in self.cells]

    def chebyshev(self, a, b) -> int:
        dx, dy = abs(a[0] - b[0]), abs(a[1] - b[1])
        if self.boundary == TOROIDAL:
            dx = min(dx, self.width - dx)
            dy = min(dy, self.height - dy)
        return max(dx, dy)


def neighborhood(world: GridWorld, pos, spec: NeighborhoodSpec = MOORE) -> list[Position]:
    """Distinct neighbor positions of ``pos``, excluding ``pos`` itself.

    Toroidal grids wrap; bounded grids clip.  On a torus with a dimension
    ``<= 2 * radius`` wrapped offsets collide, and duplicates (and wraps back
    onto ``pos``) are dropped, so the count falls below (2r+1)**2 - 1.
    Output is row-major by resolved coordinates.
    """
    table = neighbor_table(world.width, world.height, world.boundary, spec)
    w = world.width
    return [Position(i % w, i // w) for i in table[pos[1] * w + pos[0]]]


@lru_cache(maxsize=64)
def neighbor_table(width: int, height: int, boundary: str, spec: NeighborhoodSpec) -> tuple:
    """Flat-index neighbor lists for every cell, memoized per grid geometry."""
    offsets = spec.offsets()
    table = []
    for y in range(height):
        for x in range(width):
            seen = set()
            for dx, dy in offsets:
                nx, ny = x + dx, y + dy
                if boundary == TOROIDAL:
                    nx %= width
                    ny %= height
                elif not (0 <= nx < width and 0 <= ny < height):
                    continue
                if (nx, ny) != (x, y):
                    seen.add(ny * width + nx)
            table.append(tuple(sorted(seen)))
    return tuple(table)
