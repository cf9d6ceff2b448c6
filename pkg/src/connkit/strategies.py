"""Insertion search strategies and the benchmark harness.

Strategies operate in the belief frame: the nominal hole axis is at lateral
(0, 0), the true axis is hidden by the trial's perturbation. A strategy may
observe contact readings, the tip height, achieved motion deltas (encoder
proprioception), and the success click when a joint fixes. It never reads
the absolute lateral position.

Three policies:

* random: descend until stalled, then alternate uniform-disc perturbations
  about the stall point with single presses. Never rotates, so screws are
  out of reach by construction.
* grid: a boustrophedon lattice sweep; every stall on the entry funnel is
  refined with a deterministic micro-sweep at half the lattice pitch.
* hybrid: the same lattice as a fallback, but any lateral contact force is
  followed inward with a proportional correction until capture.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Callable, Iterable, Optional, Sequence

import numpy as np

from .geometry import geodesic_distance
from .graph import AssemblyGraph, ConnectorType, plan_sequence
from .pose import solve_assembly
from .sim.trial import check_success, init_trial, resolve_hole
from .sim.world import Command, ContactReading, Phase, SimParams, World, step_sim

STRATEGY_NAMES = ("random", "grid", "hybrid")


@dataclass(frozen=True)
class StrategyConfig:
    budget: int = 2000
    grid_extent: float = 5e-3        # half-width of the coarse lattice
    grid_resolution: float = 2e-3    # coarse lattice pitch
    micro_step: float = 5e-4         # micro-sweep pitch (half the clearance diameter)
    perturb_radius: float = 1e-3     # random-search disc radius
    gain: float = 0.8                # hybrid force-following gain
    fine_step: float = 1e-3          # hybrid correction scale, metres per unit force
    stall_epsilon: float = 1e-6      # descent below this counts as no progress
    stall_presses: int = 3           # consecutive no-progress presses = stalled


class BudgetExhausted(Exception):
    """Raised internally when a trial runs out of command budget."""


class _Controller:
    """Budget guard plus believed-lateral bookkeeping for one trial."""

    def __init__(self, world: World, cfg: StrategyConfig) -> None:
        self.world = world
        self.cfg = cfg
        self.cap = world.params.translation_cap
        self.rot_cap = world.params.rotation_cap
        self.bx = 0.0
        self.by = 0.0

    def fixed(self) -> bool:
        return self.world.phase is Phase.FIXED

    def remaining(self) -> int:
        return self.cfg.budget - self.world.steps

    def _step(self, cmd: Command) -> ContactReading:
        if self.world.steps >= self.cfg.budget:
            raise BudgetExhausted
        x0, y0 = self.world.x, self.world.y
        _, reading = step_sim(self.world, cmd)
        # Encoders report achieved motion; integrating it keeps the believed
        # position exactly the true one minus the hidden offset.
        self.bx += self.world.x - x0
        self.by += self.world.y - y0
        return reading

    def press(self) -> tuple[float, ContactReading]:
        z0 = self.world.z
        reading = self._step(Command.press(self.cap))
        return z0 - self.world.z, reading

    def rotate(self) -> ContactReading:
        return self._step(Command.rotate(self.rot_cap))

    def move_to(self, tx: float, ty: float, max_steps: int = 12) -> bool:
        """Walk the believed lateral position to (tx, ty); False if pinned."""
        for _ in range(max_steps):
            dx = tx - self.bx
            dy = ty - self.by
            dist = math.hypot(dx, dy)
            if dist < 1e-12:
                return True
            scale = min(1.0, self.cap / dist)
            x0, y0 = self.world.x, self.world.y
            self._step(Command.translate(dx * scale, dy * scale, 0.0))
            if math.hypot(self.world.x - x0, self.world.y - y0) < 1e-15:
                return False
        return True

    def press_until_stall(self) -> Optional[ContactReading]:
        """Press until descent stops; returns the stalled reading."""
        reading = None
        quiet = 0
        while not self.fixed():
            dz, reading = self.press()
            if dz < self.cfg.stall_epsilon:
                quiet += 1
                if quiet >= self.cfg.stall_presses:
                    break
            else:
                quiet = 0
        return reading


def grid_points(extent: float, resolution: float) -> list[tuple[float, float]]:
    """Boustrophedon lattice: start at (-extent, -extent), rows along +x."""
    n = int(round(2.0 * extent / resolution)) + 1
    coords = [-extent + k * resolution for k in range(n)]
    points = []
    for row, y in enumerate(coords):
        xs = coords if row % 2 == 0 else list(reversed(coords))
        points.extend((x, y) for x in xs)
    return points


def micro_offsets(extent: float, pitch: float) -> list[tuple[float, float]]:
    """Micro-sweep offsets around a lattice point; the origin is skipped."""
    return [(x, y) for x, y in grid_points(extent, pitch) if (x, y) != (0.0, 0.0)]


# ---------------------------------------------------------------------------
# Screw handling shared by grid and hybrid


def _screw_candidate(world: World, reading: Optional[ContactReading]) -> bool:
    return (
        world.connector is ConnectorType.SCREW
        and reading is not None
        and reading.in_contact
        and reading.lateral_magnitude == 0.0
        and world.z == 0.0
    )


def _probe_and_drive_screw(c: _Controller) -> bool:
    """One test turn, then alternate turn bursts and presses until fixed."""
    z0 = c.world.z
    for _ in range(int(math.ceil(2.0 * math.pi / c.rot_cap))):
        c.rotate()
        if c.fixed():
            return True
    c.press()
    c.press()
    if c.fixed():
        return True
    if c.world.z >= z0 - 1e-9:
        return False  # threads never bit; not actually over the bore
    no_progress = 0
    while no_progress < 3:
        z1 = c.world.z
        for _ in range(50):
            c.rotate()
            if c.fixed():
                return True
        c.press()
        if c.fixed():
            return True
        if c.world.z > z1 - 1e-9:
            no_progress += 1
        else:
            no_progress = 0
    return False


def _finish_if_captured(c: _Controller, reading: Optional[ContactReading]) -> bool:
    """Drive whatever the last stall revealed: a bore, or screw threads."""
    if c.fixed():
        return True
    if _screw_candidate(c.world, reading):
        return _probe_and_drive_screw(c)
    return False


# ---------------------------------------------------------------------------
# Strategies


def run_random_search(world: World, cfg: StrategyConfig, rng: np.random.Generator) -> None:
    c = _Controller(world, cfg)
    try:
        c.press_until_stall()
        anchor = (c.bx, c.by)
        while not c.fixed():
            u = rng.uniform()
            theta = rng.uniform(0.0, 2.0 * math.pi)
            radius = cfg.perturb_radius * math.sqrt(u)
            c.move_to(anchor[0] + radius * math.cos(theta), anchor[1] + radius * math.sin(theta))
            c.press()
    except BudgetExhausted:
        pass


def _grid_attempt(c: _Controller, cfg: StrategyConfig, px: float, py: float) -> bool:
    c.move_to(px, py)
    reading = c.press_until_stall()
    if _finish_if_captured(c, reading):
        return True
    if c.world.z >= -1e-12:
        # Stalled on flat material (or nothing underfoot): no funnel here.
        return False
    for mx, my in micro_offsets(cfg.grid_resolution / 2.0, cfg.micro_step):
        c.move_to(px + mx, py + my)
        reading = c.press_until_stall()
        if _finish_if_captured(c, reading):
            return True
    return False


def run_grid_search(world: World, cfg: StrategyConfig, rng: np.random.Generator) -> None:
    c = _Controller(world, cfg)
    try:
        for px, py in grid_points(cfg.grid_extent, cfg.grid_resolution):
            if _grid_attempt(c, cfg, px, py):
                return
    except BudgetExhausted:
        pass


def run_hybrid_search(world: World, cfg: StrategyConfig, rng: np.random.Generator) -> None:
    c = _Controller(world, cfg)
    try:
        for px, py in [(0.0, 0.0)] + grid_points(cfg.grid_extent, cfg.grid_resolution):
            c.move_to(px, py)
            reading = c.press_until_stall()
            if _finish_if_captured(c, reading):
                return
            # Follow the lateral force toward the axis while it lasts.
            while (
                reading is not None
                and reading.lateral_magnitude > 0.0
                and c.remaining() > 0
            ):
                fx, fy = reading.lateral
                c.move_to(
                    c.bx + cfg.gain * fx * cfg.fine_step,
                    c.by + cfg.gain * fy * cfg.fine_step,
                )
                reading = c.press_until_stall()
                if _finish_if_captured(c, reading):
                    return
    except BudgetExhausted:
        pass


_RUNNERS: dict[str, Callable[[World, StrategyConfig, np.random.Generator], None]] = {
    "random": run_random_search,
    "grid": run_grid_search,
    "hybrid": run_hybrid_search,
}


def run_strategy(world: World, name: str, cfg: StrategyConfig, rng: np.random.Generator) -> None:
    try:
        runner = _RUNNERS[name]
    except KeyError:
        raise ValueError(f"unknown strategy {name!r}; choose from {STRATEGY_NAMES}") from None
    runner(world, cfg, rng)


# ---------------------------------------------------------------------------
# Benchmark harness


@dataclass(frozen=True)
class TrialReport:
    task: str
    op_id: str
    connector: str
    strategy: str
    trial: int
    base_seed: int
    success: bool
    steps_used: int
    failure: Optional[str]  # None | "budget" | "exhausted" | "error: ..."
    rotation_error: Optional[float]
    translation_error: Optional[float]

    def to_dict(self) -> dict:
        return {
            "task": self.task,
            "op_id": self.op_id,
            "connector": self.connector,
            "strategy": self.strategy,
            "trial": self.trial,
            "base_seed": self.base_seed,
            "success": self.success,
            "steps_used": self.steps_used,
            "failure": self.failure,
            "rotation_error": self.rotation_error,
            "translation_error": self.translation_error,
        }


def _run_single_trial(
    graph: AssemblyGraph,
    op,
    solution,
    strategy: str,
    trial: int,
    base_seed: int,
    cfg: StrategyConfig,
    params: SimParams,
    perturbation: float,
    hole,
) -> TrialReport:
    s_idx = STRATEGY_NAMES.index(strategy)
    seq = np.random.SeedSequence(entropy=base_seed, spawn_key=(op.index, s_idx, trial))
    world_seed, strategy_seed = seq.spawn(2)
    world = init_trial(
        graph,
        op,
        solution,
        world_seed,
        perturbation=perturbation,
        hole=hole,
        params=params,
    )
    run_strategy(world, strategy, cfg, np.random.default_rng(strategy_seed))
    success = check_success(world)
    if success:
        failure = None
    elif world.steps >= cfg.budget:
        failure = "budget"
    else:
        failure = "exhausted"
    pose = world.body_pose()
    rot_err = geodesic_distance(pose.rotation, world.seated_pose.rotation)
    trans_err = float(np.linalg.norm(pose.translation - world.seated_pose.translation))
    return TrialReport(
        task=graph.name,
        op_id=op.op_id,
        connector=op.connector_type.value,
        strategy=strategy,
        trial=trial,
        base_seed=base_seed,
        success=success,
        steps_used=world.steps,
        failure=failure,
        rotation_error=rot_err,
        translation_error=trans_err,
    )


def run_benchmark(
    graph: AssemblyGraph,
    *,
    strategies: Sequence[str] = STRATEGY_NAMES,
    trials: int = 100,
    base_seed: int = 0,
    cfg: StrategyConfig = StrategyConfig(),
    params: SimParams = SimParams(),
    perturbation: float = 3e-3,
    scenario: Optional[tuple] = None,
    op_filter: Optional[Sequence[str]] = None,
    solution=None,
    progress: Optional[Callable[[TrialReport], None]] = None,
) -> list[TrialReport]:
    """Run every strategy on every planned operation of the graph.

    Seeds derive from (operation index, strategy, trial), so a run over a
    subset of strategies or operations reproduces exactly the trials of a
    full run. A trial that fails to initialize becomes an error report;
    the batch always completes.
    """
    for s in strategies:
        if s not in STRATEGY_NAMES:
            raise ValueError(f"unknown strategy {s!r}; choose from {STRATEGY_NAMES}")
    if solution is None:
        solution = solve_assembly(graph)
    ops = plan_sequence(graph)
    if op_filter is not None:
        wanted = set(op_filter)
        unknown = wanted - {op.op_id for op in ops}
        if unknown:
            raise ValueError(f"unknown operation id(s): {sorted(unknown)}")
        ops = tuple(op for op in ops if op.op_id in wanted)
    defaults, per_op = scenario if scenario is not None else ({}, {})
    reports = []
    for op in ops:
        hole = resolve_hole(op.connector_type, op.op_id, defaults, per_op)
        for strategy in strategies:
            for trial in range(trials):
                try:
                    report = _run_single_trial(
                        graph, op, solution, strategy, trial, base_seed, cfg, params,
                        perturbation, hole,
                    )
                except Exception as exc:
                    report = TrialReport(
                        task=graph.name,
                        op_id=op.op_id,
                        connector=op.connector_type.value,
                        strategy=strategy,
                        trial=trial,
                        base_seed=base_seed,
                        success=False,
                        steps_used=0,
                        failure=f"error: {type(exc).__name__}: {exc}",
                        rotation_error=None,
                        translation_error=None,
                    )
                reports.append(report)
                if progress is not None:
                    progress(report)
    return reports


@dataclass
class SummaryRow:
    task: str
    strategy: str
    trials: int = 0
    successes: int = 0
    budget_failures: int = 0
    exhausted_failures: int = 0
    total_steps: int = 0

    @property
    def success_rate(self) -> float:
        return self.successes / self.trials if self.trials else 0.0

    @property
    def mean_steps(self) -> float:
        return self.total_steps / self.trials if self.trials else 0.0


def summarize(reports: Iterable[TrialReport]) -> list[SummaryRow]:
    rows: dict[tuple[str, str], SummaryRow] = {}
    for r in reports:
        row = rows.setdefault((r.task, r.strategy), SummaryRow(task=r.task, strategy=r.strategy))
        row.trials += 1
        row.total_steps += r.steps_used
        if r.success:
            row.successes += 1
        elif r.failure == "budget":
            row.budget_failures += 1
        else:
            row.exhausted_failures += 1
    order = {name: i for i, name in enumerate(STRATEGY_NAMES)}
    return sorted(rows.values(), key=lambda row: (row.task, order.get(row.strategy, 99)))


def format_table(rows: Sequence[SummaryRow]) -> str:
    header = f"{'task':<14} {'strategy':<8} {'trials':>6} {'success':>8} {'mean steps':>10}"
    lines = [header, "-" * len(header)]
    for row in rows:
        lines.append(
            f"{row.task:<14} {row.strategy:<8} {row.trials:>6} "
            f"{row.success_rate:>8.3f} {row.mean_steps:>10.1f}"
        )
    return "\n".join(lines)


def summary_csv(rows: Sequence[SummaryRow]) -> str:
    lines = ["task,strategy,trials,successes,success_rate,budget_failures,exhausted_failures,mean_steps"]
    for row in rows:
        lines.append(
            f"{row.task},{row.strategy},{row.trials},{row.successes},"
            f"{row.success_rate:.6f},{row.budget_failures},{row.exhausted_failures},"
            f"{row.mean_steps:.2f}"
        )
    return "\n".join(lines) + "\n"


def reports_to_jsonl(reports: Iterable[TrialReport]) -> str:
    return "".join(json.dumps(r.to_dict(), sort_keys=True) + "\n" for r in reports)


def reports_from_jsonl(text: str) -> list[TrialReport]:
    out = []
    for line in text.splitlines():
        if not line.strip():
            continue
        d = json.loads(line)
        rot = d.get("rotation_error")
        trans = d.get("translation_error")
        out.append(
            TrialReport(
                task=d["task"],
                op_id=d["op_id"],
                connector=d["connector"],
                strategy=d["strategy"],
                trial=int(d["trial"]),
                base_seed=int(d.get("base_seed", 0)),
                success=bool(d["success"]),
                steps_used=int(d["steps_used"]),
                failure=d.get("failure"),
                rotation_error=None if rot is None else float(rot),
                translation_error=None if trans is None else float(trans),
            )
        )
    return out
