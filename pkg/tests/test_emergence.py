import math
import random

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from emergesim.emergence import (
    COLLECTION,
    Cluster,
    PropertyEvaluator,
    build_hyperstructure,
    cell_has_code,
    detect_clusters,
    emergence_test,
    mean_like_neighbor_fraction,
    monochrome_clusters_property,
    spatial_entropy,
)
from emergesim.engine import BOUNDED, MOORE, TOROIDAL, VON_NEUMANN, GridWorld, Position
from emergesim.schelling import BLACK, SchellingParams, run_schelling

grids = st.integers(2, 9).flatmap(
    lambda w: st.integers(2, 9).flatmap(
        lambda h: st.lists(st.lists(st.integers(0, 2), min_size=w, max_size=w), min_size=h, max_size=h)
    )
)


def world_of(rows, boundary=TOROIDAL):
    cells = np.array(rows, dtype=np.int16)
    return GridWorld(cells.shape[1], cells.shape[0], boundary, cells)


def union_find_count(world, diagonal):
    """Independent component count: union every same-coded adjacent pair."""
    w, h = world.width, world.height
    parent = {}

    def find(a):
        while parent[a] != a:
            a = parent[a]
        return a

    for y in range(h):
        for x in range(w):
            if world[(x, y)]:
                parent[(x, y)] = (x, y)
    steps = [(1, 0), (0, 1)] + ([(1, 1), (1, -1)] if diagonal else [])
    for (x, y) in list(parent):
        for dx, dy in steps:
            nx, ny = x + dx, y + dy
            if world.boundary == TOROIDAL:
                nx, ny = nx % w, ny % h
            if (nx, ny) in parent and world[(nx, ny)] == world[(x, y)]:
                parent[find((x, y))] = find((nx, ny))
    return len({find(p) for p in parent})


def test_cluster_examples():
    assert detect_clusters(world_of([[0, 0], [0, 0]])) == []
    single = detect_clusters(world_of([[0, 0, 0], [0, 1, 0], [0, 0, 0]]))
    assert len(single) == 1 and single[0].size == 1 and single[0].centroid == (1.0, 1.0)
    diag = world_of([[1, 0, 0], [0, 1, 0], [0, 0, 0]], BOUNDED)
    assert len(detect_clusters(diag, adjacency=MOORE)) == 1
    assert len(detect_clusters(diag, adjacency=VON_NEUMANN)) == 2


def test_clusters_split_by_type_and_order():
    world = world_of([[2, 1, 0, 0], [2, 1, 0, 1]], BOUNDED)
    clusters = detect_clusters(world)
    assert [c.label for c in clusters] == [2, 1, 1]
    assert [c.members[0] for c in clusters] == [(0, 0), (1, 0), (3, 1)]


def test_cluster_wraps_torus_and_centroid_unwraps():
    rows = [[0] * 6 for _ in range(4)]
    rows[1][0] = rows[1][5] = 1
    (cluster,) = detect_clusters(world_of(rows))
    assert cluster.size == 2
    assert cluster.centroid == (5.5, 1.0)
    assert len(detect_clusters(world_of(rows, BOUNDED))) == 2


@settings(max_examples=60, deadline=None)
@given(rows=grids, boundary=st.sampled_from([TOROIDAL, BOUNDED]))
def test_cluster_partition_and_counts(rows, boundary):
    world = world_of(rows, boundary)
    moore = detect_clusters(world, adjacency=MOORE)
    vn = detect_clusters(world, adjacency=VON_NEUMANN)
    selected = {p for p in world.positions() if world[p]}
    members = [m for c in moore for m in c.members]
    assert len(members) == len(set(members)) and set(members) == selected
    assert sum(c.size for c in moore) == len(selected)
    assert len(moore) <= len(vn)
    assert all(world[m] == c.label for c in moore for m in c.members)
    if min(world.width, world.height) > 2:
        assert len(moore) == union_find_count(world, True)
        assert len(vn) == union_find_count(world, False)


def brute_mean_like(world):
    vals = []
    for y in range(world.height):
        for x in range(world.width):
            me = world[(x, y)]
            if not me:
                continue
            same = total = 0
            for dy in (-1, 0, 1):
                for dx in (-1, 0, 1):
                    if dx == dy == 0:
                        continue
                    v = world[((x + dx) % world.width, (y + dy) % world.height)]
                    if v:
                        total += 1
                        same += v == me
            if total:
                vals.append(same / total)
    return sum(vals) / len(vals)


def test_mean_like_examples():
    assert mean_like_neighbor_fraction(world_of([[1] * 6] * 6)) == 1.0
    checker = world_of([[1 + (x + y) % 2 for x in range(10)] for y in range(10)])
    assert mean_like_neighbor_fraction(checker) == 0.5
    stripes = world_of([[1 if x < 5 else 2 for x in range(10)] for _ in range(10)])
    # columns 0, 4, 5, 9 see 3 foreign neighbors of 8; the other six columns see none
    assert brute_mean_like(stripes) == pytest.approx(0.85, abs=1e-12)
    assert mean_like_neighbor_fraction(stripes) == pytest.approx(brute_mean_like(stripes), abs=1e-12)


@settings(max_examples=30, deadline=None)
@given(rows=grids)
def test_mean_like_matches_brute_force(rows):
    world = world_of(rows)
    if min(world.width, world.height) < 3:
        return
    try:
        got = mean_like_neighbor_fraction(world)
    except ValueError:
        with pytest.raises(ZeroDivisionError):
            brute_mean_like(world)
        return
    assert got == pytest.approx(brute_mean_like(world), abs=1e-12)


def test_mean_like_undefined():
    with pytest.raises(ValueError, match="metric undefined"):
        mean_like_neighbor_fraction(world_of([[1, 0, 0], [0, 0, 0], [0, 0, 1]], BOUNDED))


def test_spatial_entropy_examples():
    one_block = np.zeros((4, 4), dtype=np.int16)
    one_block[:2, :2] = 1
    assert spatial_entropy(world_of(one_block), 2) == 0.0
    spread = np.zeros((4, 4), dtype=np.int16)
    spread[::2, ::2] = 1
    assert spatial_entropy(world_of(spread), 2) == pytest.approx(1.0, abs=1e-12)
    halves = np.zeros((4, 4), dtype=np.int16)
    halves[0, 0] = halves[0, 1] = halves[2, 2] = halves[3, 3] = 1
    expected = -2 * (0.5 * math.log(0.5)) / math.log(4)
    assert expected == 0.5
    assert spatial_entropy(world_of(halves), 2) == pytest.approx(0.5, abs=1e-12)


def test_spatial_entropy_errors():
    with pytest.raises(ValueError):
        spatial_entropy(world_of(np.ones((4, 4))), 3)
    with pytest.raises(ValueError):
        spatial_entropy(world_of(np.zeros((4, 4))), 2)


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2**32), sx=st.integers(0, 3), sy=st.integers(0, 2))
def test_spatial_entropy_translation_invariant(seed, sx, sy):
    rng = np.random.default_rng(seed)
    cells = (rng.random((6, 8)) < 0.3).astype(np.int16)
    cells[0, 0] = 1
    base = spatial_entropy(world_of(cells), 2)
    moved = np.roll(cells, (2 * sy, 2 * sx), axis=(0, 1))
    assert spatial_entropy(world_of(moved), 2) == pytest.approx(base, abs=1e-12)


@pytest.fixture(scope="module")
def segregated():
    final = {}
    run_schelling(SchellingParams(), 0, 500, 500, final_state=final)
    world = final["world"]
    return world, detect_clusters(world)


def test_collection_property_is_emergent(segregated):
    world, clusters = segregated
    verdict = emergence_test(monochrome_clusters_property(2, 5), world, clusters)
    assert verdict.holds_on_aggregate
    assert not verdict.defined_on_any_component
    assert verdict.emergent


def test_component_property_is_not_emergent(segregated):
    world, clusters = segregated
    verdict = emergence_test(cell_has_code(BLACK, "black"), world, clusters)
    assert verdict.holds_on_aggregate and verdict.defined_on_any_component
    assert not verdict.emergent


def test_empty_world_not_emergent():
    world = GridWorld(5, 5)
    verdict = emergence_test(monochrome_clusters_property(), world, detect_clusters(world))
    assert not verdict.holds_on_aggregate and not verdict.emergent


def test_verdict_ignores_cluster_order(segregated):
    world, clusters = segregated
    prop = monochrome_clusters_property(2, 5)
    shuffled = list(clusters)
    random.Random(0).shuffle(shuffled)
    assert emergence_test(prop, world, shuffled) == emergence_test(prop, world, clusters)


def test_component_level_must_be_defined():
    prop = PropertyEvaluator("odd", "component", lambda cs: True, lambda pos, v: None)
    world = GridWorld(2, 2, cells=np.ones((2, 2), dtype=np.int16))
    with pytest.raises(ValueError):
        emergence_test(prop, world, detect_clusters(world))
    with pytest.raises(ValueError):
        PropertyEvaluator("x", "component", lambda cs: True)


@given(holds=st.booleans(), comp=st.sampled_from([None, True, False]))
def test_emergent_implies_aggregate(holds, comp):
    prop = PropertyEvaluator("p", COLLECTION, lambda cs: holds, lambda pos, v: comp)
    world = GridWorld(3, 3, cells=np.eye(3, dtype=np.int16))
    v = emergence_test(prop, world, detect_clusters(world))
    assert v.emergent == (holds and comp is not True)
    assert not v.emergent or v.holds_on_aggregate


def _cluster(x, y, size=1):
    return Cluster(tuple(Position(x, y) for _ in range(size)), 1, (float(x), float(y)))


def test_hyperstructure_examples():
    levels = build_hyperstructure([_cluster(1, 1)], 2.0, 4)
    assert [l.level for l in levels] == [1, 2, 3]
    assert len(levels[2].structures) == 1 and levels[2].structures[0].members == (levels[1].structures[0],)

    empty = build_hyperstructure([], 2.0, 4)
    assert [l.level for l in empty] == [1, 2, 3, 4]
    assert all(l.structures == () for l in empty)

    a, b = _cluster(0, 0), _cluster(1, 1)
    merged = build_hyperstructure([a, b], 2.0, 3)
    assert len(merged[2].structures) == 1
    assert set(merged[2].structures[0].members) == {a, b}


def test_hyperstructure_threshold_grows_with_level():
    cs = [_cluster(0, 0), _cluster(1.5, 0), _cluster(7, 0), _cluster(8.5, 0)]
    levels = build_hyperstructure(cs, 2.0, 8)
    # level k+1 links within 2(k-1); the pair centroids 0.75 and 7.75 first join at level 6
    assert [len(l.structures) for l in levels[2:]] == [2, 2, 2, 1]
    assert levels[-1].structures[0].size == 4
    for lower, upper in zip(levels[1:], levels[2:]):
        covered = [m for s in upper.structures for m in s.members]
        assert sorted(map(id, covered)) == sorted(map(id, lower.structures))


def test_hyperstructure_validation():
    with pytest.raises(ValueError):
        build_hyperstructure([], 1.0, 1)
    with pytest.raises(ValueError):
        build_hyperstructure([], 0.0, 3)
