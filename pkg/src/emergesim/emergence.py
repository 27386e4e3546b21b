"""Macro-level observation of lattice worlds.

Connected same-type components are treated as second-order structures built
from first-order ones (single occupied cells).  A property is *emergent* on
the collection when it holds there but is not true of any individual cell;
a property that is undefined on a cell counts as not true, the way a single
atom has no temperature.

Only checks that can be computed from a snapshot are offered.  Emergence that
is by definition not deducible from the components cannot be tested here.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .engine import MOORE, TOROIDAL, GridWorld, NeighborhoodSpec, Position, neighbor_table

COMPONENT = "component"
COLLECTION = "collection"


@dataclass(frozen=True)
class Cluster:
    members: tuple  # Positions, row-major
    label: int
    centroid: tuple  # (x, y); unwrapped mean on a torus, reduced into the grid

    @property
    def size(self) -> int:
        return len(self.members)


def _occupied(code: int) -> bool:
    return code != 0


def detect_clusters(
    world: GridWorld,
    selector: Callable[[int], bool] = _occupied,
    adjacency: NeighborhoodSpec = MOORE,
) -> list[Cluster]:
    """Maximal connected components of selected cells sharing the same code.

    Clusters come out ordered by their smallest row-major member.
    """
    w, h = world.width, world.height
    flat = world.cells.ravel().tolist()
    table = neighbor_table(w, h, world.boundary, adjacency)
    torus = world.boundary == TOROIDAL
    seen = bytearray(w * h)
    clusters = []
    for start in range(w * h):
        code = flat[start]
        if seen[start] or not selector(code):
            continue
        seen[start] = 1
        members = [start]
        sx, sy = start % w, start // w
        unwrapped = {start: (sx, sy)}
        queue = deque([start])
        while queue:
            cur = queue.popleft()
            ux, uy = unwrapped[cur]
            cx, cy = cur % w, cur // w
            for nb in table[cur]:
                if seen[nb] or flat[nb] != code:
                    continue
                seen[nb] = 1
                dx, dy = nb % w - cx, nb // w - cy
                if torus:
                    dx = (dx + w // 2) % w - w // 2
                    dy = (dy + h // 2) % h - h // 2
                unwrapped[nb] = (ux + dx, uy + dy)
                members.append(nb)
                queue.append(nb)
        n = len(members)
        mx = sum(unwrapped[m][0] for m in members) / n
        my = sum(unwrapped[m][1] for m in members) / n
        if torus:
            mx %= w
            my %= h
        clusters.append(
            Cluster(tuple(Position(m % w, m // w) for m in sorted(members)), int(code), (mx, my))
        )
    return clusters


def like_counts(world: GridWorld, pos) -> tuple[int, int]:
    """(same-code, occupied) counts over the Moore neighbors of ``pos``."""
    table = neighbor_table(world.width, world.height, world.boundary, MOORE)
    flat = world.cells.ravel()
    own = flat[world.index(pos)]
    same = total = 0
    for nb in table[world.index(pos)]:
        v = flat[nb]
        if v:
            total += 1
            same += v == own
    return int(same), total


def mean_like_neighbor_fraction(world: GridWorld) -> float:
    """Mean like-neighbor fraction over occupied cells with an occupied neighbor."""
    table = neighbor_table(world.width, world.height, world.boundary, MOORE)
    flat = world.cells.ravel().tolist()
    acc = 0.0
    n = 0
    for i, own in enumerate(flat):
        if not own:
            continue
        same = total = 0
        for nb in table[i]:
            v = flat[nb]
            if v:
                total += 1
                if v == own:
                    same += 1
        if total:
            acc += same / total
            n += 1
    if n == 0:
        raise ValueError("metric undefined: no resident has an occupied neighbor")
    return acc / n


def spatial_entropy(world: GridWorld, block: int, selector: Callable[[int], bool] = _occupied) -> float:
    """Normalized Shannon entropy of selected-cell counts over square blocks.

    0 when everything sits in one block, 1 when blocks hold equal shares.
    """
    if block < 1 or world.width % block or world.height % block:
        raise ValueError(f"block {block} does not divide grid {world.width}x{world.height}")
    mask = np.vectorize(selector, otypes=[bool])(world.cells)
    by, bx = world.height // block, world.width // block
    counts = mask.reshape(by, block, bx, block).sum(axis=(1, 3)).ravel()
    total = int(counts.sum())
    if total == 0:
        raise ValueError("spatial entropy undefined: no items")
    if counts.size == 1:
        return 0.0
    h = 0.0
    for c in counts.tolist():
        if c:
            q = c / total
            h -= q * math.log(q)
    return h / math.log(counts.size)


def cluster_summary(clusters: list[Cluster], total: Optional[int] = None) -> dict:
    """``cluster_count`` and ``largest_cluster_fraction`` metric values."""
    if total is None:
        total = sum(c.size for c in clusters)
    largest = max((c.size for c in clusters), default=0)
    return {
        "cluster_count": len(clusters),
        "largest_cluster_fraction": largest / total if total else 0.0,
    }


# --- emergence predicate ---------------------------------------------------


@dataclass(frozen=True)
class PropertyEvaluator:
    """An observation applicable to the cluster collection and to single cells.

    ``on_component(pos, code)`` returns True/False, or None where the
    property has no meaning for a lone cell.  Component-level evaluators must
    always return a definite value there.
    """

    name: str
    arity: str
    on_aggregate: Callable[[list], Optional[bool]]
    on_component: Optional[Callable[[Position, int], Optional[bool]]] = None

    def __post_init__(self):
        if self.arity not in (COMPONENT, COLLECTION):
            raise ValueError(f"arity must be {COMPONENT!r} or {COLLECTION!r}")
        if self.arity == COMPONENT and self.on_component is None:
            raise ValueError("component-level evaluator needs on_component")


@dataclass(frozen=True)
class EmergenceVerdict:
    property_name: str
    holds_on_aggregate: bool
    defined_on_any_component: bool
    true_on_any_component: bool

    @property
    def emergent(self) -> bool:
        return self.holds_on_aggregate and not self.true_on_any_component


def emergence_test(evaluator: PropertyEvaluator, world: GridWorld, clusters: list[Cluster]) -> EmergenceVerdict:
    holds = evaluator.on_aggregate(clusters) is True
    defined = truthy = False
    for pos in world.occupied():
        value = None
        if evaluator.on_component is not None:
            value = evaluator.on_component(pos, world[pos])
        if value is None:
            if evaluator.arity == COMPONENT:
                raise ValueError(f"{evaluator.name}: component-level property undefined at {pos}")
            continue
        defined = True
        if value is True:
            truthy = True
    return EmergenceVerdict(evaluator.name, holds, defined, truthy)


def monochrome_clusters_property(min_clusters: int = 2, min_size: int = 5) -> PropertyEvaluator:
    """'contains >= min_clusters monochrome clusters of size >= min_size'."""

    def aggregate(clusters):
        return sum(1 for c in clusters if c.size >= min_size) >= min_clusters

    return PropertyEvaluator(
        f"contains >= {min_clusters} monochrome clusters of size >= {min_size}",
        COLLECTION,
        aggregate,
        lambda pos, code: None,
    )


def cell_has_code(code: int, name: str) -> PropertyEvaluator:
    """Component-level property 'cell is <name>'; on the collection it asks
    whether any structure carries that code."""
    return PropertyEvaluator(
        f"cell is {name}",
        COMPONENT,
        lambda clusters: any(c.label == code for c in clusters),
        lambda pos, value: value == code,
    )


# --- hyperstructures -------------------------------------------------------


@dataclass(frozen=True)
class Structure:
    level: int
    members: tuple  # level-(N-1) structures
    size: int  # occupied cells covered
    centroid: tuple


@dataclass(frozen=True)
class StructureLevel:
    level: int
    structures: tuple


def _group(items: list, threshold: float) -> list[list[int]]:
    parent = list(range(len(items)))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(len(items)):
        xi, yi = items[i].centroid
        for j in range(i + 1, len(items)):
            xj, yj = items[j].centroid
            if math.hypot(xi - xj, yi - yj) <= threshold:
                a, b = find(i), find(j)
                if a != b:
                    parent[max(a, b)] = min(a, b)
    groups: dict[int, list[int]] = {}
    for i in range(len(items)):
        groups.setdefault(find(i), []).append(i)
    return [groups[k] for k in sorted(groups)]


def build_hyperstructure(clusters: list[Cluster], linking_distance: float, max_level: int) -> list[StructureLevel]:
    """Levels 1..N: cells, clusters, then groups of groups.

    Level k+1 joins level-k structures whose centroids (plain Euclidean,
    size-weighted) lie within ``linking_distance * (k - 1)``, transitively.
    Construction stops at the first level above 2 holding a single structure.
    """
    if max_level < 2:
        raise ValueError("max_level must be >= 2")
    if linking_distance <= 0:
        raise ValueError("linking_distance must be > 0")
    cells = tuple(Structure(1, (), 1, (float(p.x), float(p.y))) for c in clusters for p in c.members)
    levels = [StructureLevel(1, cells), StructureLevel(2, tuple(clusters))]
    current = list(clusters)
    for k in range(2, max_level):
        merged = []
        for idx in _group(current, linking_distance * (k - 1)):
            parts = tuple(current[i] for i in idx)
            size = sum(p.size for p in parts)
            cx = sum(p.centroid[0] * p.size for p in parts) / size
            cy = sum(p.centroid[1] * p.size for p in parts) / size
            merged.append(Structure(k + 1, parts, size, (cx, cy)))
        levels.append(StructureLevel(k + 1, tuple(merged)))
        current = merged
        if len(current) == 1:
            break
    return levels
