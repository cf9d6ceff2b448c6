"""Strategy behavior on worlds with known hidden offsets, plus the batch
harness. Success geometry worth keeping in mind: random search can reach at
most perturb_radius + clearance = 1.5 mm from its stall anchor, the coarse
lattice spans 5 mm per axis, and the hybrid fine phase closes a unit-force
gradient at gain * fine_step = 0.8 mm per iteration."""

import math

import numpy as np
import pytest

from connkit.geometry import RigidTransform
from connkit.graph import ConnectorType
from connkit.sim import Command, Phase, SimParams, World, check_success, default_hole, step_sim
from connkit.strategies import (
    STRATEGY_NAMES,
    StrategyConfig,
    TrialReport,
    grid_points,
    micro_offsets,
    reports_from_jsonl,
    reports_to_jsonl,
    run_benchmark,
    run_strategy,
    summarize,
    summary_csv,
    format_table,
)

MT = ConnectorType.MORTISE_TENON


def offset_world(offset, connector=MT):
    """A world whose tip starts hovering with a known hidden lateral offset."""
    hole = default_hole(connector)
    return World(
        hole=hole,
        connector=connector,
        params=SimParams(),
        tip=(offset[0], offset[1], 2e-3),
        base_rotation=np.eye(3),
        tip_offset=np.zeros(3),
        seated_pose=RigidTransform(np.eye(3), np.array([0.0, 0.0, -hole.depth])),
        hidden_offset=(offset[0], offset[1]),
    )


# -- lattice geometry -----------------------------------------------------------


def test_grid_points_serpentine_layout():
    pts = grid_points(5e-3, 2e-3)
    assert len(pts) == 36
    assert pts[0] == pytest.approx((-5e-3, -5e-3))
    assert pts[1] == pytest.approx((-3e-3, -5e-3))
    assert pts[5] == pytest.approx((5e-3, -5e-3))
    # next row reverses direction
    assert pts[6] == pytest.approx((5e-3, -3e-3))
    assert pts[-1] == pytest.approx((-5e-3, 5e-3))
    assert all(abs(x) <= 5e-3 + 1e-12 and abs(y) <= 5e-3 + 1e-12 for x, y in pts)


def test_grid_rows_change_one_axis_at_a_time():
    pts = grid_points(5e-3, 2e-3)
    for a, b in zip(pts, pts[1:]):
        moved = (abs(a[0] - b[0]) > 1e-12) + (abs(a[1] - b[1]) > 1e-12)
        assert moved == 1


def test_micro_offsets_skip_origin():
    offs = micro_offsets(1e-3, 5e-4)
    assert len(offs) == 24
    assert (0.0, 0.0) not in offs


# -- random search ---------------------------------------------------------------


def test_random_search_never_reaches_three_millimetres():
    cfg = StrategyConfig()
    for seed in range(50):
        w = offset_world((3e-3, 0.0))
        run_strategy(w, "random", cfg, np.random.default_rng(seed))
        assert not check_success(w)
        assert w.steps <= cfg.budget


def test_random_search_captures_inside_its_reach():
    cfg = StrategyConfig()
    hits = 0
    for seed in range(10):
        w = offset_world((1e-3, 0.0))  # inside perturb_radius + clearance
        run_strategy(w, "random", cfg, np.random.default_rng(seed))
        hits += check_success(w)
    assert hits >= 5


def test_random_search_never_rotates_so_screws_fail():
    cfg = StrategyConfig()
    w = offset_world((0.0, 0.0), connector=ConnectorType.SCREW)
    run_strategy(w, "random", cfg, np.random.default_rng(0))
    assert w.turns == 0.0
    assert not check_success(w)


# -- grid search -------------------------------------------------------------------


@pytest.mark.parametrize(
    "offset",
    [
        (0.0, 0.0),
        (2.2e-3, -1.3e-3),
        (-4.0e-3, 4.0e-3),
        (5.0e-3, 5.0e-3),
        (-5.0e-3, -5.0e-3),
        (-4.9e-3, 2.7e-3),
    ],
)
def test_grid_covers_five_millimetres_per_axis(offset):
    cfg = StrategyConfig()
    w = offset_world(offset)
    run_strategy(w, "grid", cfg, np.random.default_rng(0))
    assert check_success(w), f"offset {offset}"
    assert w.steps <= cfg.budget


def test_grid_misses_beyond_lattice():
    cfg = StrategyConfig()
    w = offset_world((8e-3, 0.0))
    run_strategy(w, "grid", cfg, np.random.default_rng(0))
    assert not check_success(w)


def test_grid_drives_screws_home():
    cfg = StrategyConfig()
    w = offset_world((1.7e-3, -0.9e-3), connector=ConnectorType.SCREW)
    run_strategy(w, "grid", cfg, np.random.default_rng(0))
    assert check_success(w)
    assert w.turns >= w.hole.depth / w.lead


# -- hybrid search -----------------------------------------------------------------


def test_hybrid_fine_phase_iteration_bound():
    """From a 3 mm offset the force-following loop must capture within
    ceil(3 / 0.8) = 4 corrections; written out step by step here."""
    cfg = StrategyConfig()
    w = offset_world((3e-3, 0.0))
    reading = None
    for _ in range(4):
        _, reading = step_sim(w, Command.press(1e-3))
    assert reading.lateral_magnitude == pytest.approx(1.0)

    iterations = 0
    while w.phase is Phase.FREE and iterations < 10:
        fx, fy = reading.lateral
        step_sim(w, Command.translate(cfg.gain * fx * cfg.fine_step, cfg.gain * fy * cfg.fine_step))
        for _ in range(3):
            _, reading = step_sim(w, Command.press(1e-3))
            if w.phase is not Phase.FREE:
                break
        iterations += 1
    assert iterations <= math.ceil(3e-3 / (cfg.gain * cfg.fine_step))
    assert w.phase is not Phase.FREE


def test_hybrid_succeeds_on_three_millimetre_offset_quickly():
    cfg = StrategyConfig()
    w = offset_world((3e-3, 0.0))
    run_strategy(w, "hybrid", cfg, np.random.default_rng(0))
    assert check_success(w)
    assert w.steps < 60  # no lattice walk needed; force-following is direct


def test_hybrid_diagonal_offsets():
    cfg = StrategyConfig()
    for offset in [(2e-3, 2e-3), (-3e-3, 1e-3), (4e-3, -4e-3)]:
        w = offset_world(offset)
        run_strategy(w, "hybrid", cfg, np.random.default_rng(0))
        assert check_success(w), f"offset {offset}"


def test_unknown_strategy_name_rejected():
    with pytest.raises(ValueError):
        run_strategy(offset_world((0.0, 0.0)), "spiral", StrategyConfig(), np.random.default_rng(0))


# -- benchmark harness ---------------------------------------------------------------


def test_noiseless_hybrid_wins_everywhere():
    from connkit.fixtures import fixture, fixture_names

    for name in fixture_names():
        reports = run_benchmark(
            fixture(name), strategies=("hybrid",), trials=1, perturbation=0.0
        )
        assert reports, name
        assert ' '.join(r.op_id for r in reports if not r.success) == ""


def test_benchmark_orders_strategies_on_one_fixture():
    from connkit.fixtures import fixture

    reports = run_benchmark(fixture("shoe_shelf"), trials=8, base_seed=0)
    rows = {row.strategy: row for row in summarize(reports)}
    assert rows["hybrid"].success_rate >= rows["grid"].success_rate
    assert rows["grid"].success_rate > rows["random"].success_rate
    assert all(r.steps_used <= StrategyConfig().budget for r in reports)


def test_benchmark_seed_stability_across_strategy_subsets():
    from connkit.fixtures import fixture

    g = fixture("shoe_shelf")
    full = run_benchmark(g, trials=2, op_filter=("E1.0",))
    only = run_benchmark(g, trials=2, op_filter=("E1.0",), strategies=("hybrid",))
    assert [r for r in full if r.strategy == "hybrid"] == only


def test_benchmark_rejects_unknown_inputs():
    from connkit.fixtures import fixture

    g = fixture("shoe_shelf")
    with pytest.raises(ValueError):
        run_benchmark(g, strategies=("spiral",), trials=1)
    with pytest.raises(ValueError):
        run_benchmark(g, trials=1, op_filter=("E9.9",))


def test_trial_reports_round_trip_jsonl():
    from connkit.fixtures import fixture

    reports = run_benchmark(
        fixture("shoe_shelf"), trials=1, op_filter=("E1.0",), strategies=("hybrid",)
    )
    assert reports_from_jsonl(reports_to_jsonl(reports)) == reports


def test_reports_jsonl_tolerates_missing_base_seed():
    line = (
        '{"task": "t", "op_id": "E1.0", "connector": "dowel", "strategy": "grid",'
        ' "trial": 0, "success": true, "steps_used": 10, "failure": null,'
        ' "rotation_error": null, "translation_error": null}\n'
    )
    (report,) = reports_from_jsonl(line)
    assert report.base_seed == 0
    assert report.success


def test_summary_outputs_cover_all_rows():
    reports = [
        TrialReport("t", "E1.0", "dowel", s, i, 0, s == "hybrid", 10, None if s == "hybrid" else "budget", None, None)
        for s in STRATEGY_NAMES
        for i in range(3)
    ]
    rows = summarize(reports)
    assert [r.strategy for r in rows] == list(STRATEGY_NAMES)
    table = format_table(rows)
    assert "hybrid" in table and "success" in table
    csv = summary_csv(rows)
    assert csv.count("\n") == 4  # header + one line per strategy
    assert csv.startswith("task,strategy,")
