"""Acceptance gate: one test per criterion, each printing PASS/FAIL.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the per-criterion
lines. The full module takes a couple of minutes; the reference-regime
benchmark (criterion 6) dominates.
"""

import filecmp
import math
import time

import numpy as np

from ildars.cli import main as cli_main
from ildars.clustering import circular_segment, cluster_by_inversion
from ildars.calibration import PairSelection, calibrate
from ildars.geometry import Line3, closest_point_n_lines, invert_point, normalize
from ildars.harness import (
    RunConfig,
    aggregate,
    experiment_measurements,
    rank_combos,
    run,
)
from ildars.simulation import generate_measurements, make_cube_room, place_senders

DEFAULT_SEED = 1


def _report(criterion, ok, detail):
    print(f"[{'PASS' if ok else 'FAIL'}] criterion {criterion}: {detail}")
    assert ok, detail


def test_criterion_1_zero_error_end_to_end():
    cfg = RunConfig.zero_error(n_experiments=10, master_seed=DEFAULT_SEED)
    started = time.perf_counter()
    records = run(cfg)
    elapsed = time.perf_counter() - started

    failed = sum(r.failed for r in records)
    worst = max(r.offset for r in records if not r.failed)
    clusters_ok = True
    for experiment_id in range(cfg.n_experiments):
        _, ms = experiment_measurements(cfg, experiment_id)
        sizes = sorted(len(c) for c in cluster_by_inversion(ms, cfg.inversion_threshold))
        clusters_ok = clusters_ok and sizes == [20] * 6
    ok = failed == 0 and worst < 1e-6 and clusters_ok and elapsed < 10.0
    _report(
        1,
        ok,
        f"78 combos x 10 experiments: worst offset {worst:.2e} m, "
        f"{failed} failed senders, inversion 6x20={clusters_ok}, {elapsed:.1f}s (<10s)",
    )


def test_criterion_2_calibration_exactness():
    room = make_cube_room(2.0)
    truth = place_senders(room, 20, seed=DEFAULT_SEED)
    ms = generate_measurements(truth)
    clusters = cluster_by_inversion(ms, 0.3)
    worst_angle = 0.0
    worst_distance = 0.0
    for selection in PairSelection:
        estimates = calibrate(ms, clusters, selection)
        assert len(estimates) == 6
        for est in estimates:
            wall_id = ms[clusters[est.source_cluster].measurement_indices[0]].true_wall_id
            wall = room.walls[wall_id]
            angle = math.acos(min(1.0, max(-1.0, float(np.dot(est.u, wall.unit_normal)))))
            worst_angle = max(worst_angle, angle)
            worst_distance = max(worst_distance, abs(est.distance - 1.0))
    ok = worst_angle < 1e-9 and worst_distance < 1e-9
    _report(
        2,
        ok,
        f"all pair selections: max direction error {worst_angle:.2e} rad, "
        f"max distance error {worst_distance:.2e} m",
    )


def test_criterion_3_circular_segment_collinearity_oracle():
    room = make_cube_room(2.0)
    truth = place_senders(room, 167, seed=DEFAULT_SEED)  # 167 x 6 = 1002 measurements
    ms = generate_measurements(truth)[:1000]
    assert len(ms) == 1000
    p_samples = np.geomspace(0.05, 50.0, 10)
    worst = 0.0
    for m in ms:
        cs = circular_segment(m)
        a = 2.0 * m.w / m.delta
        b = (m.w - m.v) / m.delta
        d = b - a
        d = d / np.linalg.norm(d)
        for p in p_samples:
            q = invert_point(cs.point_at(float(p)))
            worst = max(worst, float(np.linalg.norm(np.cross(q - a, d))))
    ok = worst < 1e-9
    _report(3, ok, f"1000 measurements x 10 curve samples: max line deviation {worst:.2e}")


def test_criterion_4_combination_count(capsys):
    assert cli_main(["combos"]) == 0
    tokens = capsys.readouterr().out.strip().splitlines()
    constraint = all(t[2] == "U" for t in tokens if t[3] == "E")
    ok = len(tokens) == 78 and len(set(tokens)) == 78 and constraint
    with capsys.disabled():
        _report(4, ok, f"ildars combos emitted {len(tokens)} unique ids, E=>U={constraint}")


def _objective(points, lines):
    total = np.zeros(points.shape[0])
    for line in lines:
        r = points - line.anchor[None, :]
        proj = r @ line.direction
        total += (r**2).sum(axis=1) - proj**2
    return total


def _brute_force(lines, half_width=8.0, iters=45):
    center = np.mean([line.anchor for line in lines], axis=0)
    for _ in range(iters):
        offsets = np.linspace(-half_width, half_width, 11)
        gx, gy, gz = np.meshgrid(offsets, offsets, offsets, indexing="ij")
        grid = center[None, :] + np.column_stack([gx.ravel(), gy.ravel(), gz.ravel()])
        center = grid[int(np.argmin(_objective(grid, lines)))]
        half_width *= 0.55
    return center


def test_criterion_5_multi_line_solver_oracle():
    rng = np.random.default_rng(DEFAULT_SEED)
    worst = 0.0
    for _ in range(100):
        n_lines = int(rng.integers(3, 7))
        lines = [
            Line3(rng.uniform(-2.0, 2.0, size=3), normalize(rng.normal(size=3)))
            for _ in range(n_lines)
        ]
        got = closest_point_n_lines(lines)
        expected = _brute_force(lines)
        worst = max(worst, float(np.linalg.norm(got - expected)))
    ok = worst < 1e-6
    _report(5, ok, f"100 instances of 3-6 lines: max deviation from oracle {worst:.2e} m")


def test_criterion_6_reference_regime_orderings():
    started = time.perf_counter()
    seeds = (DEFAULT_SEED, DEFAULT_SEED + 1, DEFAULT_SEED + 2)
    mean_vs_median_ok = True
    inversion_best = []
    inversion_dominates = []
    best_tokens = []
    for i, seed in enumerate(seeds):
        cfg = RunConfig(n_experiments=100, master_seed=seed)
        stats = aggregate(run(cfg))
        if i == 0:
            mean_vs_median_ok = all(s.mean >= s.median - 1e-3 for s in stats)
        best = rank_combos(stats, "median")[0]
        best_tokens.append(best.combo.token)
        inversion_best.append(best.combo.clustering == "I")
        i_median = float(np.median([s.median for s in stats if s.combo.clustering == "I"]))
        g_median = float(np.median([s.median for s in stats if s.combo.clustering == "G"]))
        inversion_dominates.append(i_median < g_median)
    elapsed = time.perf_counter() - started

    ianc_hits = sum(t == "IANC" for t in best_tokens)
    print(
        f"[INFO] criterion 6c: best-by-median per seed {best_tokens}; "
        f"the reference single-run winner IANC appeared {ianc_hits}/3 times "
        "(reported, not gated)"
    )
    ok = (
        mean_vs_median_ok
        and all(inversion_best)
        and all(inversion_dominates)
        and elapsed < 300.0
    )
    _report(
        6,
        ok,
        f"mean>=median(all combos)={mean_vs_median_ok}, best-by-median uses "
        f"inversion={all(inversion_best)}, I-medians<G-medians={all(inversion_dominates)} "
        f"on 3 seeds, {elapsed:.0f}s (<300s)",
    )


def test_criterion_7_statistics_cross_check():
    rng = np.random.default_rng(DEFAULT_SEED)
    values = rng.exponential(scale=0.25, size=1000).tolist()

    xs = sorted(values)
    n = len(xs)
    mean = sum(xs) / n
    median = (xs[n // 2 - 1] + xs[n // 2]) / 2 if n % 2 == 0 else xs[n // 2]
    std = math.sqrt(sum((x - mean) ** 2 for x in xs) / n)

    def quantile(q):
        pos = q * (n - 1)
        lo = int(math.floor(pos))
        hi = min(lo + 1, n - 1)
        return xs[lo] * (1 - (pos - lo)) + xs[hi] * (pos - lo)

    from ildars.harness import ComboId, OffsetRecord

    combo = ComboId("I", "A", "L", "C")
    (stats,) = aggregate(
        [OffsetRecord(0, combo, i, v, False) for i, v in enumerate(values)]
    )
    deviations = [
        abs(stats.mean - mean),
        abs(stats.median - median),
        abs(stats.std - std),
        abs(stats.q1 - quantile(0.25)),
        abs(stats.q3 - quantile(0.75)),
    ]
    ok = max(deviations) < 1e-12
    _report(7, ok, f"aggregate vs naive reference: max deviation {max(deviations):.2e}")


def test_criterion_8_deterministic_reports(tmp_path):
    flags = [
        "run",
        "--experiments", "3",
        "--seed", str(DEFAULT_SEED),
    ]
    assert cli_main(flags + ["--out", str(tmp_path / "first")]) == 0
    assert cli_main(flags + ["--out", str(tmp_path / "second")]) == 0
    names = ["ranking_mean.csv", "ranking_median.csv", "ranking_std.csv"]
    identical = all(
        filecmp.cmp(tmp_path / "first" / name, tmp_path / "second" / name, shallow=False)
        for name in names
    )
    _report(8, identical, f"two identical CLI runs: ranking CSVs byte-identical={identical}")
