"""Acceptance criteria, each run at its stated tolerance with fixed seeds."""

import time
from fractions import Fraction

import numpy as np
import pytest

from emergesim.ants import AntParams, drop_probability, pickup_probability, run_ant_model
from emergesim.config import parse_config
from emergesim.emergence import (
    cell_has_code,
    detect_clusters,
    emergence_test,
    monochrome_clusters_property,
)
from emergesim.engine import RngStream
from emergesim.impact import ImpactParams, run_impact
from emergesim.runner import run_experiment
from emergesim.schelling import (
    BLACK,
    WHITE,
    SchellingParams,
    integrated_initial,
    run_schelling,
    schelling_sweep,
)

pytestmark = pytest.mark.acceptance

SEEDS = range(10)
SCHELLING = SchellingParams(width=20, height=20, vacancy_fraction=0.1, perturb_fraction=0.05)
ANTS = AntParams(width=50, height=50, n_ants=10, item_types=1, items_per_type=200, k1=0.1, k2=0.3, memory=50,
                 entropy_block=10)
IMPACT = ImpactParams(width=20, height=20, minority_fraction=0.3)
ANT_TICKS = 200_000


@pytest.fixture(scope="module")
def schelling_runs():
    start = time.perf_counter()
    runs = []
    for seed in SEEDS:
        final = {}
        trace = run_schelling(SCHELLING, seed, 500, 1, final_state=final)
        runs.append((trace, final))
    return runs, time.perf_counter() - start


@pytest.fixture(scope="module")
def ant_runs():
    run_ant_model(ANTS, 0, 1, 1)  # compile outside the timed region
    start = time.perf_counter()
    runs = [run_ant_model(ANTS, seed, ANT_TICKS, 10_000) for seed in SEEDS]
    return runs, time.perf_counter() - start


@pytest.fixture(scope="module")
def impact_runs():
    start = time.perf_counter()
    runs = []
    for seed in SEEDS:
        final = {}
        trace = run_impact(IMPACT, seed, 500, 1, final_state=final)
        runs.append((trace, final))
    return runs, time.perf_counter() - start


def test_1_probability_formulas(criterion):
    start = time.perf_counter()
    fs = np.linspace(0.0, 1.0, 40)
    ks = np.geomspace(0.01, 5.0, 25)
    worst = 0.0
    for f in fs.tolist():
        for k in ks.tolist():
            pick = float((Fraction(k) / (Fraction(k) + Fraction(f))) ** 2)
            drop = float((Fraction(f) / (Fraction(k) + Fraction(f))) ** 2)
            worst = max(worst, abs(pickup_probability(f, k) - pick), abs(drop_probability(f, k) - drop))
    elapsed = time.perf_counter() - start
    ok = worst <= 1e-12 and elapsed < 1.0
    assert criterion(1, ok, f"{fs.size * ks.size} points, max error {worst:.1e}, {elapsed:.2f}s")


def test_2_checkerboard_attractor(criterion):
    start = time.perf_counter()
    params = SchellingParams(width=10, height=10, vacancy_fraction=0.0)
    world = integrated_initial(params, RngStream(0))
    rng = RngStream(1)
    moves = sum(schelling_sweep(world, params, rng)[1] for _ in range(1000))
    elapsed = time.perf_counter() - start
    assert criterion(2, moves == 0 and elapsed < 1.0, f"{moves} moves in 1000 sweeps, {elapsed:.2f}s")


def test_3_schelling_segregation(criterion, schelling_runs):
    runs, elapsed = schelling_runs
    outcomes = []
    for trace, _ in runs:
        before = trace[0].metrics["mean_like_fraction"]
        after = trace.last.metrics["mean_like_fraction"]
        outcomes.append((abs(before - 0.5) <= 0.03 and after >= 0.70, before, after))
    hits = sum(o[0] for o in outcomes)
    finals = ", ".join(f"{o[2]:.3f}" for o in outcomes)
    ok = hits >= 9 and elapsed < 10.0
    assert criterion(3, ok, f"{hits}/10 seeds reach >= 0.70 (final: {finals}), {elapsed:.1f}s")


def test_4_ant_clustering(criterion, ant_runs):
    runs, elapsed = ant_runs
    hits = 0
    ratios = []
    for trace in runs:
        first, last = trace[0].metrics, trace.last.metrics
        ratios.append(last["cluster_count"] / first["cluster_count"])
        hits += (
            last["cluster_count"] <= 0.5 * first["cluster_count"]
            and last["spatial_entropy"] < first["spatial_entropy"]
        )
    ok = hits >= 9 and elapsed < 60.0
    assert criterion(4, ok, f"{hits}/10 seeds, cluster ratios {min(ratios):.2f}-{max(ratios):.2f}, {elapsed:.1f}s")


def test_5_conservation(criterion, ant_runs, schelling_runs):
    ants_ok = all(
        e.metrics["items_on_grid"] + e.metrics["items_carried"] == 200 for trace in ant_runs[0] for e in trace
    )
    colours_ok = True
    for trace, _ in schelling_runs[0]:
        counts = {(int((e.cells == BLACK).sum()), int((e.cells == WHITE).sum())) for e in trace}
        colours_ok &= len(counts) == 1
    records = sum(len(t) for t in ant_runs[0]) + sum(len(t) for t, _ in schelling_runs[0])
    assert criterion(5, ants_ok and colours_ok, f"items={ants_ok} colours={colours_ok} over {records} records")


def test_6_social_impact_diversity(criterion, impact_runs):
    runs, elapsed = impact_runs
    hits = 0
    survived = converged = 0
    for trace, final in runs:
        survived += trace.last.metrics["minority_fraction"] > 0
        converged += final["converged"]
        hits += (
            final["converged"]
            and trace.last.metrics["minority_fraction"] > 0
            and trace.last.metrics["mean_like_fraction"] > trace[0].metrics["mean_like_fraction"]
        )
    ok = hits >= 8 and elapsed < 10.0
    detail = f"{hits}/10 seeds (converged {converged}, minority survived {survived}), {elapsed:.1f}s"
    assert criterion(6, ok, detail)


def test_7_emergence_predicate(criterion, schelling_runs):
    collective = monochrome_clusters_property(2, 5)
    black = cell_has_code(BLACK, "black")
    checked = 0
    ok = True
    for _, final in schelling_runs[0]:
        if not final["converged"]:
            continue
        world = final["world"]
        clusters = detect_clusters(world)
        ok &= emergence_test(collective, world, clusters).emergent is True
        ok &= emergence_test(black, world, clusters).emergent is False
        checked += 1
    ok &= checked > 0
    assert criterion(7, ok, f"verdicts correct on {checked} converged worlds")


def _files(root):
    out = {}
    for path in sorted(root.rglob("*")):
        if path.is_file() and path.name != "manifest.json":
            out[str(path.relative_to(root))] = path.read_bytes()
    return out


def test_8_determinism(criterion, tmp_path):
    configs = {
        "schelling": "schelling.width = 20\nschelling.height = 20\nschelling.vacancy_fraction = 0.1\n"
        "schelling.perturb_fraction = 0.05\nrun.ticks = 500\nrun.snapshot_every = 1\n",
        "impact": "impact.minority_fraction = 0.3\nrun.ticks = 500\nrun.snapshot_every = 1\n",
        "ant": f"run.ticks = {ANT_TICKS}\nrun.snapshot_every = 10000\n",
    }
    ok = True
    compared = 0
    for model, body in configs.items():
        for seed in (0, 7):
            outputs = []
            for rep in ("a", "b"):
                out = tmp_path / f"{model}-{seed}-{rep}"
                run_experiment(parse_config(f"run.model = {model}\nrun.seed = {seed}\nrun.output_dir = {out}\n{body}"))
                outputs.append(_files(out))
            ok &= outputs[0] == outputs[1] and len(outputs[0]) > 1
            compared += len(outputs[0])
    assert criterion(8, ok, f"{compared} files byte-identical across reruns")
