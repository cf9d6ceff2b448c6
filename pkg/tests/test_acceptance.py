"""Acceptance gate: one test per shipped claim, one [ACCEPT] line each.

Run with ``pytest tests/test_acceptance.py -s`` to see the verdict lines.
These tests are intentionally heavier than the unit suite (large sample
counts, full benchmark sweeps) and re-check the headline numbers end to end.
"""

import json
import math
import time

import numpy as np
import pytest
from click.testing import CliRunner

from connkit.cli import main as cli_main
from connkit.extraction import (
    ExtractionStep,
    PairLabel,
    StepComponent,
    baseline_success_probability,
    dataset_from_graph,
    random_baseline,
    score_dataset,
    score_step,
    StepPrediction,
)
from connkit.fixtures import fixture, fixture_names
from connkit.geometry import RigidTransform, geodesic_distance, random_rotation, rotation_about_axis
from connkit.graph import ConnectorType, plan_sequence
from connkit.pose import MatchedPairs, alignment_objective, chamfer_distance, pose_metrics, solve_alignment
from connkit.sim import Command, SimParams, World, default_hole, step_sim
from connkit.sim.world import phase_rank, Phase
from connkit.strategies import run_benchmark
from connkit.vlm import ScriptedClient, oracle_script, run_pipeline
from _oracles import best_sampled_objective


def _verdict(number: int, failures: list, elapsed: float | None = None) -> None:
    status = "PASS" if not failures else "FAIL"
    suffix = f" ({elapsed:.1f}s)" if elapsed is not None else ""
    print(f"[ACCEPT] criterion {number}: {status}{suffix}")
    assert not failures, "; ".join(failures)


def _random_problem(rng, k, noise=0.0):
    r_true = random_rotation(rng)
    t_true = rng.normal(size=3) * 0.3
    pa = rng.normal(size=(k, 3)) * 0.1
    na = rng.normal(size=(k, 3))
    na /= np.linalg.norm(na, axis=1, keepdims=True)
    pb = pa @ r_true.T + t_true
    nb = -(na @ r_true.T)
    if noise:
        pb = pb + rng.normal(size=(k, 3)) * noise
    return MatchedPairs(pa, na, pb, nb), r_true, t_true


def test_criterion_1_solver_exactness_and_noise_accuracy():
    t0 = time.perf_counter()
    rng = np.random.default_rng(20260819)
    failures: list[str] = []

    worst_rot, worst_trans = 0.0, 0.0
    for i in range(1000):
        k = 3 + i % 4
        pairs, r_true, t_true = _random_problem(rng, k)
        res = solve_alignment(pairs)
        worst_rot = max(worst_rot, geodesic_distance(res.transform.rotation, r_true))
        worst_trans = max(worst_trans, float(np.linalg.norm(res.transform.translation - t_true)))
    if worst_rot >= 1e-7:
        failures.append(f"clean rotation error {worst_rot:.3e} >= 1e-7")
    if worst_trans >= 1e-9:
        failures.append(f"clean translation error {worst_trans:.3e} >= 1e-9")

    trans_errors, chamfer_hits = [], 0
    n_noisy = 1000
    for i in range(n_noisy):
        k = 3 + i % 4
        pairs, r_true, t_true = _random_problem(rng, k, noise=5e-4)
        res = solve_alignment(pairs)
        trans_errors.append(float(np.linalg.norm(res.transform.translation - t_true)))
        cloud = pairs.positions_a
        truth = RigidTransform(r_true, t_true)
        if chamfer_distance(res.transform.apply(cloud), truth.apply(cloud)) < 0.01:
            chamfer_hits += 1
    pa = chamfer_hits / n_noisy
    if pa != 1.0:
        failures.append(f"part accuracy under noise {pa} != 1.0")
    med = float(np.median(trans_errors))
    if med >= 1e-3:
        failures.append(f"median translation error under noise {med:.3e} >= 1e-3")

    elapsed = time.perf_counter() - t0
    if elapsed >= 5.0:
        failures.append(f"runtime {elapsed:.1f}s >= 5s")
    _verdict(1, failures, elapsed)


def test_criterion_2_solver_beats_sampled_rotations():
    t0 = time.perf_counter()
    rng = np.random.default_rng(4242)
    failures: list[str] = []
    for i in range(100):
        k = 1 + i % 6
        pairs, _, _ = _random_problem(rng, k)
        res = solve_alignment(pairs)
        solver_obj = alignment_objective(pairs, res.transform.rotation, res.transform.translation)
        best = best_sampled_objective(
            pairs.positions_a, pairs.normals_a, pairs.positions_b, pairs.normals_b,
            pairs.alpha, 100_000, 9000 + i,
        )
        if best < solver_obj - 1e-9:
            failures.append(f"instance {i} (k={k}): sampled {best:.3e} < solver {solver_obj:.3e}")
    elapsed = time.perf_counter() - t0
    if elapsed >= 60.0:
        failures.append(f"runtime {elapsed:.1f}s >= 60s")
    _verdict(2, failures, elapsed)


def test_criterion_3_metric_fidelity():
    failures: list[str] = []
    mt = ConnectorType.MORTISE_TENON
    step = ExtractionStep(
        step_index=1,
        components=(
            StepComponent(node="l", candidates=("A1", "A2")),
            StepComponent(node="r", candidates=("B1", "B2", "B3")),
        ),
        connector_budget={"mortise_tenon": 2},
        truth_pairs=(PairLabel("A1", "B1", mt), PairLabel("A2", "B2", mt)),
    )
    pred = StepPrediction(step_index=1, pairs=(PairLabel("A1", "B1", mt), PairLabel("A2", "B3", mt)))
    score = score_step(step, pred)
    if score.pair_f1 != 0.5:
        failures.append(f"pair_f1 {score.pair_f1} != 0.5")
    if score.set_f1 != 0.75:
        failures.append(f"set_f1 {score.set_f1} != 0.75")

    eighth_turn = rotation_about_axis((0.0, 0.0, 1.0), math.pi / 4)
    cloud = np.array([[0.1, 0.0, 0.0], [0.0, 0.1, 0.0], [0.0, 0.0, 0.1]])
    metrics = pose_metrics(
        [RigidTransform(eighth_turn)], [RigidTransform()], [cloud], tau_pa=0.01
    )
    if abs(metrics.rotation_geodesic - math.pi / 4) > 1e-12:
        failures.append(f"geodesic {metrics.rotation_geodesic!r} is not pi/4 within 1e-12")
    _verdict(3, failures)


def test_criterion_4_monte_carlo_matches_enumeration():
    failures: list[str] = []
    mt = ConnectorType.MORTISE_TENON
    step = ExtractionStep(
        step_index=1,
        components=(
            StepComponent(node="left", candidates=("A1", "A2")),
            StepComponent(node="right", candidates=("B1", "B2")),
        ),
        connector_budget={"mortise_tenon": 1},
        truth_pairs=(PairLabel("A1", "B1", mt),),
    )
    exact = baseline_success_probability(step)
    if exact != 0.25:
        failures.append(f"exact enumeration gives {exact}, expected 0.25")

    n = 10_000
    truth = {p.key(True) for p in step.truth_pairs}

    def estimate() -> float:
        hits = 0
        for i in range(n):
            pred = random_baseline(step, np.random.SeedSequence(entropy=0, spawn_key=(i,)))
            if {p.key(True) for p in pred.pairs} == truth:
                hits += 1
        return hits / n

    p_hat = estimate()
    se = math.sqrt(exact * (1.0 - exact) / n)
    if abs(p_hat - exact) > 2 * se:
        failures.append(f"|{p_hat} - {exact}| > 2 SE ({2 * se:.4f})")
    if estimate() != p_hat:
        failures.append("estimate is not seed-deterministic")
    _verdict(4, failures)


def test_criterion_5_fixture_plan_counts():
    failures: list[str] = []
    expected = {"shoe_shelf": 11, "chair": 22, "lego_person": 8, "plane_model": 12}
    for name, count in expected.items():
        got = len(plan_sequence(fixture(name)))
        if got != count:
            failures.append(f"{name}: {got} operations, expected {count}")
    if set(fixture_names()) != set(expected):
        failures.append(f"fixture set {sorted(fixture_names())} unexpected")
    _verdict(5, failures)


def test_criterion_6_screw_invariants_under_fuzz():
    t0 = time.perf_counter()
    failures: list[str] = []
    rng = np.random.default_rng(616)
    hole = default_hole(ConnectorType.SCREW)

    def random_command():
        kind = rng.integers(3)
        if kind == 0:
            dx, dy, dz = rng.uniform(-2e-3, 2e-3, size=3)
            return Command.translate(dx, dy, dz)
        if kind == 1:
            return Command.press(float(rng.uniform(0.0, 2e-3)))
        return Command.rotate(float(rng.uniform(-0.15, 0.15)))

    for seq in range(10_000):
        if failures:
            break
        start = (float(rng.uniform(-4e-3, 4e-3)), float(rng.uniform(-4e-3, 4e-3)), 2e-3)
        w = World(
            hole=hole,
            connector=ConnectorType.SCREW,
            params=SimParams(),
            tip=start,
            base_rotation=np.eye(3),
            tip_offset=np.zeros(3),
            seated_pose=RigidTransform(np.eye(3), np.array([0.0, 0.0, -hole.depth])),
        )
        rank = phase_rank(w.phase)
        for _ in range(20):
            step_sim(w, random_command())
            if w.inserted_depth > w.lead * w.turns:
                failures.append(f"seq {seq}: inserted {w.inserted_depth} > pitch*turns {w.lead * w.turns}")
                break
            if phase_rank(w.phase) < rank:
                failures.append(f"seq {seq}: phase moved backward")
                break
            rank = phase_rank(w.phase)
            if w.phase is Phase.FREE and math.hypot(w.x, w.y) <= w.hole.clearance and w.z < 0.0:
                failures.append(f"seq {seq}: translated into the bore without rotation")
                break
    elapsed = time.perf_counter() - t0
    if elapsed >= 30.0:
        failures.append(f"runtime {elapsed:.1f}s >= 30s")
    _verdict(6, failures, elapsed)


def test_criterion_7_strategy_ordering():
    t0 = time.perf_counter()
    failures: list[str] = []
    for name in ("shoe_shelf", "chair", "lego_person", "plane_model"):
        reports = run_benchmark(
            fixture(name), trials=100, base_seed=0, perturbation=3e-3
        )
        rates = {}
        for strategy in ("random", "grid", "hybrid"):
            rows = [r.success for r in reports if r.strategy == strategy]
            rates[strategy] = sum(rows) / len(rows)
        if rates["hybrid"] < rates["grid"]:
            failures.append(f"{name}: hybrid {rates['hybrid']:.3f} < grid {rates['grid']:.3f}")
        if rates["grid"] - rates["random"] < 0.4:
            failures.append(
                f"{name}: grid {rates['grid']:.3f} - random {rates['random']:.3f} < 0.4"
            )
        if rates["random"] >= 0.2:
            failures.append(f"{name}: random {rates['random']:.3f} >= 0.2")
    elapsed = time.perf_counter() - t0
    if elapsed >= 600.0:
        failures.append(f"runtime {elapsed:.1f}s >= 600s")
    _verdict(7, failures, elapsed)


def test_criterion_8_pipeline_closure():
    failures: list[str] = []
    for name in fixture_names():
        ds = dataset_from_graph(fixture(name))
        run = run_pipeline(ds, ScriptedClient(oracle_script(ds)))
        score = score_dataset(ds, run.predictions)
        values = (score.pair_f1, score.pair_success, score.set_f1, score.set_success)
        if values != (1.0, 1.0, 1.0, 1.0):
            failures.append(f"{name}: oracle scores {values}")

    ds = dataset_from_graph(fixture("chair"))
    responses = oracle_script(ds)
    broken = 2
    responses[(broken, 2)] = "completely unusable reply"
    run = run_pipeline(ds, ScriptedClient(responses))
    score = score_dataset(ds, run.predictions)
    for step, s in zip(ds.steps, score.per_step):
        if step.step_index == broken:
            if (s.pair_f1, s.set_f1) != (0.0, 0.0):
                failures.append(f"broken step scored {s.pair_f1}/{s.set_f1}, expected 0/0")
        elif (s.pair_f1, s.set_f1) != (1.0, 1.0):
            failures.append(f"step {step.step_index} degraded to {s.pair_f1}/{s.set_f1}")
    _verdict(8, failures)


def test_criterion_9_rerun_determinism(tmp_path):
    failures: list[str] = []
    runner = CliRunner()

    def invoke(*args):
        result = runner.invoke(cli_main, list(args), catch_exceptions=False)
        assert result.exit_code == 0, result.output
        return result

    sim_outs = []
    for tag in ("a", "b"):
        out = tmp_path / f"sim_{tag}.jsonl"
        invoke(
            "sim", "run", "--graph", "fixture:shoe_shelf",
            "--strategy", "random", "--trials", "3", "--seed", "11",
            "--ops", "E1.0,E2.0", "--out", str(out),
        )
        sim_outs.append((out.read_bytes(), (tmp_path / f"sim_{tag}.jsonl.config.json").read_bytes()))
    if sim_outs[0][0] != sim_outs[1][0]:
        failures.append("sim run reports differ between reruns")

    base_outs = []
    for tag in ("a", "b"):
        out = tmp_path / f"base_{tag}.json"
        invoke(
            "extract", "random-baseline", "fixture:chair",
            "--method", "sample", "--samples", "100", "--seed", "5",
            "--out", str(out),
        )
        base_outs.append(out.read_bytes())
    if base_outs[0] != base_outs[1]:
        failures.append("random-baseline outputs differ between reruns")
    _verdict(9, failures)
