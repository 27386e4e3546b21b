"""Simulation trace and the plain-text grid snapshot format."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .grid import GridWorld

HEADER = "P-GRID"


@dataclass(frozen=True)
class Snapshot:
    tick: int
    cells: np.ndarray
    symbols: tuple
    metrics: dict

    def render(self) -> list[str]:
        lookup = dict(self.symbols)
        return ["".join(lookup[int(v)] for v in row) for row in self.cells]

    def to_text(self) -> str:
        h, w = self.cells.shape
        return format_grid(self.render(), w, h, self.tick)


@dataclass
class Trace:
    entries: list = field(default_factory=list)

    def __len__(self):
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    def __getitem__(self, i):
        return self.entries[i]

    @property
    def ticks(self) -> list[int]:
        return [e.tick for e in self.entries]

    @property
    def last(self) -> Snapshot:
        return self.entries[-1]


def record_snapshot(world: GridWorld, tick: int, metrics: dict, trace: Trace) -> Trace:
    """Append a detached copy of ``world`` and ``metrics`` at ``tick``."""
    if tick < 0:
        raise ValueError("trace order violation: negative tick")
    if trace.entries:
        last = trace.entries[-1]
        if tick <= last.tick:
            raise ValueError(f"trace order violation: tick {tick} after {last.tick}")
        if last.cells.shape != world.cells.shape:
            raise ValueError("trace order violation: snapshot dimensions changed")
    cells = world.cells.copy()
    cells.setflags(write=False)
    symbols = tuple(sorted(world.symbols.items()))
    trace.entries.append(Snapshot(tick, cells, symbols, dict(metrics)))
    return trace


def format_grid(rows: list[str], width: int, height: int, tick: int) -> str:
    if len(rows) != height or any(len(r) != width for r in rows):
        raise ValueError("row data does not match grid dimensions")
    return f"{HEADER} {width} {height} {tick}\n" + "".join(r + "\n" for r in rows)


def parse_grid(text: str) -> tuple[int, list[str]]:
    """Inverse of :func:`format_grid`; returns ``(tick, rows)``."""
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    parts = lines[0].split() if lines else []
    if len(parts) != 4 or parts[0] != HEADER:
        raise ValueError("missing P-GRID header")
    width, height, tick = (int(p) for p in parts[1:])
    rows = lines[1:]
    if len(rows) != height or any(len(r) != width for r in rows):
        raise ValueError("grid body does not match header dimensions")
    return tick, rows
