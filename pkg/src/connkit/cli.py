"""Command line interface.

Graph sources accepted anywhere a SOURCE argument appears: a path to a
graph JSON file, or ``fixture:<name>`` for one of the built-in assemblies
(chair, shoe_shelf, lego_person, plane_model).

Commands that write an output file also write ``<out>.config.json`` with
the fully resolved parameters, so a result can always be traced back to
the settings that produced it. A JSON file named by the CONNKIT_CONFIG
environment variable supplies per-command defaults, e.g.
``{"sim": {"run": {"trials": 20}}}``.
"""

from __future__ import annotations

import functools
import json
import logging
import os
import sys
from pathlib import Path

import click
import numpy as np

from . import __version__
from .errors import ConnkitError
from .extraction import (
    baseline_success_probability,
    dataset_from_graph,
    dataset_to_dict,
    load_dataset_file,
    load_predictions_file,
    predictions_to_dict,
    random_baseline,
    score_dataset,
)
from .fixtures import fixture, fixture_names, write_fixture_files
from .geometry import RigidTransform
from .graph import AssemblyGraph, load_graph_file, plan_sequence, validate
from .pose import AssemblySolution, pose_metrics, solve_assembly
from .sim.trial import check_success, init_trial, load_hole_overrides, resolve_hole
from .sim.world import SimParams
from .strategies import (
    STRATEGY_NAMES,
    StrategyConfig,
    format_table,
    reports_from_jsonl,
    reports_to_jsonl,
    run_benchmark,
    run_strategy,
    summarize,
    summary_csv,
)
from .vlm.clients import HttpModelClient, RecordingClient, ReplayClient, ScriptedClient
from .vlm.pipeline import oracle_script, run_pipeline

log = logging.getLogger("connkit")


def _stable(doc) -> str:
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def _cli_errors(fn):
    """Map domain errors (bad files, invalid graphs) to exit code 1.

    Usage errors (unknown flags, bad option values) stay on click's native
    exit code 2.
    """

    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except ConnkitError as exc:
            raise click.ClickException(str(exc)) from exc

    return wrapper


def _load_source(source: str) -> AssemblyGraph:
    if source.startswith("fixture:"):
        name = source.split(":", 1)[1]
        if name not in fixture_names():
            raise click.UsageError(
                f"unknown fixture {name!r}; available: {', '.join(fixture_names())}"
            )
        return fixture(name)
    return load_graph_file(source)


def _load_dataset_source(source: str):
    if source.startswith("fixture:"):
        return dataset_from_graph(_load_source(source))
    return load_dataset_file(source)


def _echo_config(out_path: str, command: str, params: dict) -> None:
    doc = {"command": command, "parameters": params, "version": __version__}
    Path(str(out_path) + ".config.json").write_text(_stable(doc))


@click.group()
@click.version_option(version=__version__, prog_name="connkit")
@click.option("-v", "--verbose", is_flag=True, help="Debug logging.")
@click.option("-q", "--quiet", is_flag=True, help="Warnings only.")
@click.pass_context
def main(ctx: click.Context, verbose: bool, quiet: bool) -> None:
    level = logging.DEBUG if verbose else logging.WARNING if quiet else logging.INFO
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    config_path = os.environ.get("CONNKIT_CONFIG")
    if config_path:
        try:
            ctx.default_map = json.loads(Path(config_path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise click.UsageError(f"CONNKIT_CONFIG {config_path}: {exc}")


# ---------------------------------------------------------------------------
# graph


@main.group()
def graph() -> None:
    """Inspect, validate and plan assembly graphs."""


@graph.command("validate")
@click.option("--graph", "source", required=True,
              help="Graph JSON path or fixture:<name>.")
@click.pass_context
@_cli_errors
def graph_validate(ctx: click.Context, source: str) -> None:
    """Check a graph against the structural rules; exit 1 on violations."""
    g = _load_source(source)
    report = validate(g)
    click.echo(f"{g.name}: {report}")
    if not report.ok:
        ctx.exit(1)


@graph.command("plan")
@click.option("--graph", "source", required=True,
              help="Graph JSON path or fixture:<name>.")
@click.option("--out", type=click.Path(dir_okay=False), help="Write the plan as JSON.")
@_cli_errors
def graph_plan(source: str, out: str | None) -> None:
    """Print the graph's connection operations in assembly order."""
    g = _load_source(source)
    ops = plan_sequence(g)
    for op in ops:
        click.echo(
            f"{op.index:3d}  {op.op_id:<8} {op.connector_type.value:<13} "
            f"fixed={op.fixed_node:<16} held={op.held_node}"
        )
    click.echo(f"{len(ops)} operation(s)")
    if out:
        doc = {
            "graph": g.name,
            "operations": [
                {
                    "index": op.index,
                    "op_id": op.op_id,
                    "edge": op.edge_name,
                    "connector_type": op.connector_type.value,
                    "fixed_node": op.fixed_node,
                    "held_node": op.held_node,
                }
                for op in ops
            ],
        }
        Path(out).write_text(_stable(doc))
        _echo_config(out, "graph plan", {"source": source})


@graph.command("write-fixtures")
@click.argument("directory", type=click.Path(file_okay=False))
@_cli_errors
def graph_write_fixtures(directory: str) -> None:
    """Write the built-in assemblies as graph JSON files into DIRECTORY."""
    paths = write_fixture_files(directory)
    for p in paths:
        click.echo(str(p))


# ---------------------------------------------------------------------------
# pose


@main.group()
def pose() -> None:
    """Solve connection poses and score pose predictions."""


def _part_clouds(g: AssemblyGraph) -> dict:
    clouds = {}
    for part, points in g.parts.items():
        positions = [f.position for f in points.values()]
        clouds[part] = np.asarray(positions, dtype=float) if positions else np.zeros((1, 3))
    return clouds


@pose.command("solve")
@click.option("--graph", "source", required=True,
              help="Graph JSON path or fixture:<name>.")
@click.option("--edge", help="Report only this connection edge.")
@click.option("--alpha", type=float, default=1.0, show_default=True, help="Normal-term weight.")
@click.option("--out", type=click.Path(dir_okay=False), help="Write poses as JSON.")
@_cli_errors
def pose_solve(source: str, edge: str | None, alpha: float, out: str | None) -> None:
    """Recover part poses from the graph's attachment correspondences."""
    g = _load_source(source)
    solution = solve_assembly(g, alpha=alpha)
    if edge is not None:
        try:
            op = solution.for_edge(edge)
        except KeyError:
            raise click.ClickException(f"no solved operation for edge {edge!r}")
        doc = {
            "edge": op.edge_name,
            "op_id": op.op_id,
            "held_node": op.held_node,
            "fixed_node": op.fixed_node,
            "transform": op.transform.to_dict(),
            "residual": op.residual,
            "degeneracy": op.degeneracy.value,
        }
        click.echo(_stable(doc), nl=False)
        if out:
            Path(out).write_text(_stable(doc))
            _echo_config(out, "pose solve", {"source": source, "edge": edge, "alpha": alpha})
        return
    for op in solution.operations:
        click.echo(
            f"{op.op_id:<8} held={op.held_node:<16} residual={op.residual:.3e} "
            f"[{op.degeneracy.value}]"
        )
    if out:
        doc = {
            "format_version": 1,
            "graph": g.name,
            "alpha": alpha,
            "parts": {part: t.to_dict() for part, t in sorted(solution.part_poses.items())},
            "operations": [
                {
                    "op_id": op.op_id,
                    "edge": op.edge_name,
                    "fixed_node": op.fixed_node,
                    "held_node": op.held_node,
                    "residual": op.residual,
                    "degeneracy": op.degeneracy.value,
                }
                for op in solution.operations
            ],
        }
        Path(out).write_text(_stable(doc))
        _echo_config(out, "pose solve", {"source": source, "alpha": alpha})


def _load_pose_file(path: str) -> dict:
    try:
        doc = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise click.UsageError(f"{path}: {exc}")
    if "parts" not in doc:
        raise click.UsageError(f"{path}: missing 'parts' mapping")
    return {name: RigidTransform.from_dict(d) for name, d in doc["parts"].items()}


@pose.command("eval")
@click.argument("truth_file", type=click.Path(exists=True, dir_okay=False))
@click.argument("pred_file", type=click.Path(exists=True, dir_okay=False))
@click.option("--graph", "graph_source", required=True, help="Graph the poses belong to.")
@click.option("--tau-pa", type=float, default=0.01, show_default=True,
              help="Chamfer threshold for part accuracy.")
@click.option("--out", type=click.Path(dir_okay=False), help="Write metrics as JSON.")
@_cli_errors
def pose_eval(truth_file: str, pred_file: str, graph_source: str, tau_pa: float, out: str | None) -> None:
    """Score predicted part poses against reference poses."""
    g = _load_source(graph_source)
    truth = _load_pose_file(truth_file)
    pred = _load_pose_file(pred_file)
    missing = sorted(set(truth) - set(pred))
    if missing:
        raise click.UsageError(f"{pred_file}: no pose for part(s) {', '.join(missing)}")
    clouds = _part_clouds(g)
    unknown = sorted(set(truth) - set(clouds))
    if unknown:
        raise click.UsageError(f"{truth_file}: part(s) not in graph: {', '.join(unknown)}")
    names = sorted(truth)
    metrics = pose_metrics(
        [pred[n] for n in names],
        [truth[n] for n in names],
        [clouds[n] for n in names],
        tau_pa=tau_pa,
    )
    click.echo(f"rotation geodesic : {metrics.rotation_geodesic:.6f} rad")
    click.echo(f"rmse              : {metrics.rmse:.6e}")
    click.echo(f"chamfer           : {metrics.chamfer:.6e}")
    click.echo(f"part accuracy     : {100.0 * metrics.part_accuracy:.2f}%")
    if out:
        Path(out).write_text(_stable(metrics.to_dict()))
        _echo_config(out, "pose eval", {
            "graph": graph_source, "truth": truth_file, "pred": pred_file, "tau_pa": tau_pa,
        })


# ---------------------------------------------------------------------------
# extract


@main.group()
def extract() -> None:
    """Connection-extraction datasets, scoring and baselines."""


@extract.command("dataset")
@click.argument("source")
@click.option("--out", type=click.Path(dir_okay=False), required=True)
@_cli_errors
def extract_dataset(source: str, out: str) -> None:
    """Derive the per-step extraction dataset from a graph SOURCE."""
    ds = _load_dataset_source(source)
    Path(out).write_text(_stable(dataset_to_dict(ds)))
    _echo_config(out, "extract dataset", {"source": source})
    click.echo(f"{ds.name}: {len(ds.steps)} step(s) -> {out}")


@extract.command("eval")
@click.argument("pred_file", type=click.Path(exists=True, dir_okay=False))
@click.option("--dataset", "dataset_source", required=True,
              help="Dataset JSON path or fixture:<name>.")
@click.option("--ignore-types", is_flag=True,
              help="Match pairs on endpoints only, not connector type.")
@click.option("--out", type=click.Path(dir_okay=False), help="Write scores as JSON.")
@_cli_errors
def extract_eval(pred_file: str, dataset_source: str, ignore_types: bool, out: str | None) -> None:
    """Score step predictions against dataset ground truth."""
    ds = _load_dataset_source(dataset_source)
    predictions = load_predictions_file(pred_file)
    score = score_dataset(ds, predictions, require_type_match=not ignore_types)
    click.echo(f"pair F1      : {score.pair_f1:.4f}")
    click.echo(f"pair success : {100.0 * score.pair_success:.2f}%")
    click.echo(f"set F1       : {score.set_f1:.4f}")
    click.echo(f"set success  : {100.0 * score.set_success:.2f}%")
    if out:
        doc = {
            "dataset": ds.name,
            "require_type_match": not ignore_types,
            "pair_f1": score.pair_f1,
            "pair_success": score.pair_success,
            "set_f1": score.set_f1,
            "set_success": score.set_success,
            "per_step": [
                {
                    "step_index": step.step_index,
                    "pair_f1": s.pair_f1,
                    "pair_success": s.pair_success,
                    "set_f1": s.set_f1,
                    "set_success": s.set_success,
                }
                for step, s in zip(ds.steps, score.per_step)
            ],
        }
        Path(out).write_text(_stable(doc))
        _echo_config(out, "extract eval", {
            "dataset": dataset_source, "pred": pred_file, "ignore_types": ignore_types,
        })


@extract.command("random-baseline")
@click.argument("source")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--method", type=click.Choice(["exact", "sample"]), default="exact",
              show_default=True, help="Exact enumeration or Monte Carlo.")
@click.option("--samples", type=int, default=2000, show_default=True,
              help="Draws per step for --method sample.")
@click.option("--ignore-types", is_flag=True,
              help="Success on endpoint sets only, not connector types.")
@click.option("--emit-predictions", type=click.Path(dir_okay=False),
              help="Also write one sampled prediction per step.")
@click.option("--out", type=click.Path(dir_okay=False), help="Write probabilities as JSON.")
@_cli_errors
def extract_random_baseline(
    source: str,
    seed: int,
    method: str,
    samples: int,
    ignore_types: bool,
    emit_predictions: str | None,
    out: str | None,
) -> None:
    """Success probability of budget-respecting uniform random pairing."""
    ds = _load_dataset_source(source)
    require_types = not ignore_types
    per_step = []
    for step in ds.steps:
        if method == "exact":
            p = baseline_success_probability(step, require_type_match=require_types)
            drawn = None
        else:
            truth = {x.key(require_types) for x in step.truth_pairs}
            seq = np.random.SeedSequence(entropy=seed, spawn_key=(step.step_index,))
            hits = 0
            for child in seq.spawn(samples):
                pred = random_baseline(step, child)
                if {x.key(require_types) for x in pred.pairs} == truth:
                    hits += 1
            p = hits / samples
            drawn = samples
        per_step.append({"step_index": step.step_index, "success_probability": p,
                         **({"samples": drawn} if drawn else {})})
        click.echo(f"step {step.step_index:3d}: p(success) = {p:.6f}")
    mean_p = sum(e["success_probability"] for e in per_step) / len(per_step) if per_step else 1.0
    click.echo(f"mean over {len(per_step)} step(s): {mean_p:.6f}")
    if emit_predictions:
        seq = np.random.SeedSequence(entropy=seed, spawn_key=(2**31,))
        preds = [random_baseline(step, child) for step, child in zip(ds.steps, seq.spawn(len(ds.steps)))]
        Path(emit_predictions).write_text(_stable(predictions_to_dict(preds, ds.name)))
    if out:
        doc = {
            "dataset": ds.name,
            "method": method,
            "seed": seed,
            "require_type_match": require_types,
            "per_step": per_step,
            "mean_success_probability": mean_p,
        }
        Path(out).write_text(_stable(doc))
        _echo_config(out, "extract random-baseline", {
            "source": source, "seed": seed, "method": method,
            "samples": samples if method == "sample" else None,
            "ignore_types": ignore_types,
        })


@extract.command("run-pipeline")
@click.argument("source")
@click.option("--out", type=click.Path(dir_okay=False), required=True,
              help="Results file, written incrementally.")
@click.option("--oracle", is_flag=True,
              help="Use the built-in scripted responses that match ground truth.")
@click.option("--replay", type=click.Path(exists=True, dir_okay=False),
              help="Answer from a recorded transcript instead of a live model.")
@click.option("--endpoint", help="HTTP endpoint of a live model.")
@click.option("--model", "model_name", default="vlm-default", show_default=True)
@click.option("--record", type=click.Path(dir_okay=False),
              help="With --endpoint: save the transcript for later --replay.")
@click.option("--resume", is_flag=True, help="Skip steps already in the results file.")
@click.option("--parallelism", type=int, default=1, show_default=True)
@_cli_errors
def extract_run_pipeline(
    source: str,
    out: str,
    oracle: bool,
    replay: str | None,
    endpoint: str | None,
    model_name: str,
    record: str | None,
    resume: bool,
    parallelism: int,
) -> None:
    """Run the two-stage extraction pipeline over a dataset."""
    ds = _load_dataset_source(source)
    chosen = [name for name, flag in
              [("--oracle", oracle), ("--replay", replay), ("--endpoint", endpoint)] if flag]
    if len(chosen) != 1:
        raise click.UsageError("choose exactly one of --oracle, --replay or --endpoint")
    recorder = None
    if oracle:
        client = ScriptedClient(oracle_script(ds))
    elif replay:
        client = ReplayClient(replay)
    else:
        client = HttpModelClient(endpoint, model=model_name)
        if record:
            client = recorder = RecordingClient(client)
    run = run_pipeline(ds, client, out_path=out, resume=resume, parallelism=parallelism)
    if recorder is not None and record:
        recorder.save(record)
    score = score_dataset(ds, run.predictions)
    failed = [o.step_index for o in run.outcomes if o.diagnostics]
    click.echo(f"{len(run.outcomes)} step(s) -> {out}")
    if failed:
        click.echo(f"steps with diagnostics: {failed}")
    click.echo(f"pair F1 {score.pair_f1:.4f}  set F1 {score.set_f1:.4f}  "
               f"success {100.0 * score.pair_success:.2f}%")
    _echo_config(out, "extract run-pipeline", {
        "source": source, "mode": chosen[0].lstrip("-"), "resume": resume,
        "parallelism": parallelism,
    })


# ---------------------------------------------------------------------------
# sim


@main.group()
def sim() -> None:
    """Insertion simulation benchmarks."""


def _load_solution(poses_path: str) -> AssemblySolution:
    return AssemblySolution(part_poses=_load_pose_file(poses_path), operations=())


@sim.command("run")
@click.option("--graph", "source", required=True,
              help="Graph JSON path or fixture:<name>.")
@click.option("--poses", "poses_path", type=click.Path(exists=True, dir_okay=False),
              help="Solved poses from `pose solve --out`; default solves in-process.")
@click.option("--strategy", "strategy",
              type=click.Choice(list(STRATEGY_NAMES) + ["all"]), default="all",
              show_default=True)
@click.option("--trials", type=int, default=5, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--budget", type=int, default=2000, show_default=True)
@click.option("--perturbation", type=float, default=3e-3, show_default=True,
              help="Lateral start offset bound per axis, metres.")
@click.option("--ops", "ops_csv", help="Comma-separated operation ids to run.")
@click.option("--scenario", type=click.Path(exists=True, dir_okay=False),
              help="Hole-spec override file.")
@click.option("--out", type=click.Path(dir_okay=False), help="Write per-trial reports as JSONL.")
@_cli_errors
def sim_run(
    source: str,
    poses_path: str | None,
    strategy: str,
    trials: int,
    seed: int,
    budget: int,
    perturbation: float,
    ops_csv: str | None,
    scenario: str | None,
    out: str | None,
) -> None:
    """Benchmark insertion strategies on every planned operation."""
    g = _load_source(source)
    chosen = STRATEGY_NAMES if strategy == "all" else (strategy,)
    overrides = None
    if scenario:
        overrides = load_hole_overrides(Path(scenario).read_text())
    cfg = StrategyConfig(budget=budget)
    try:
        reports = run_benchmark(
            g,
            strategies=chosen,
            trials=trials,
            base_seed=seed,
            cfg=cfg,
            params=SimParams(),
            perturbation=perturbation,
            scenario=overrides,
            op_filter=[s.strip() for s in ops_csv.split(",")] if ops_csv else None,
            solution=_load_solution(poses_path) if poses_path else None,
        )
    except ValueError as exc:
        raise click.UsageError(str(exc))
    click.echo(format_table(summarize(reports)))
    errors = [r for r in reports if r.failure and r.failure.startswith("error:")]
    if errors:
        click.echo(f"{len(errors)} trial(s) reported errors; see the JSONL output")
    if out:
        Path(out).write_text(reports_to_jsonl(reports))
        _echo_config(out, "sim run", {
            "source": source, "poses": poses_path, "strategy": strategy, "trials": trials,
            "seed": seed, "budget": budget, "perturbation": perturbation,
            "ops": ops_csv, "scenario": scenario,
        })


@sim.command("trace")
@click.option("--graph", "source", required=True,
              help="Graph JSON path or fixture:<name>.")
@click.option("--op", "op_id", required=True, help="Operation id, e.g. E1.0.")
@click.option("--strategy", type=click.Choice(list(STRATEGY_NAMES)), default="hybrid",
              show_default=True)
@click.option("--trial", type=int, default=0, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--out", type=click.Path(dir_okay=False), required=True,
              help="Trajectory log, one JSON record per sim step.")
@_cli_errors
def sim_trace(source: str, op_id: str, strategy: str, trial: int, seed: int, out: str) -> None:
    """Replay one trial and dump its full step-by-step trajectory."""
    g = _load_source(source)
    ops = {op.op_id: op for op in plan_sequence(g)}
    if op_id not in ops:
        raise click.ClickException(f"unknown operation {op_id!r}; see `graph plan`")
    op = ops[op_id]
    solution = solve_assembly(g)
    s_idx = STRATEGY_NAMES.index(strategy)
    seq = np.random.SeedSequence(entropy=seed, spawn_key=(op.index, s_idx, trial))
    world_seed, strategy_seed = seq.spawn(2)
    hole = resolve_hole(op.connector_type, op.op_id, {}, {})
    world = init_trial(g, op, solution, world_seed, hole=hole, enable_log=True)
    run_strategy(world, strategy, StrategyConfig(), np.random.default_rng(strategy_seed))
    with open(out, "w") as fh:
        for record in world.log or []:
            fh.write(json.dumps(record, sort_keys=True) + "\n")
    _echo_config(out, "sim trace", {
        "source": source, "op": op_id, "strategy": strategy, "trial": trial, "seed": seed,
    })
    click.echo(f"{world.steps} step(s), success={check_success(world)} -> {out}")


@sim.command("report")
@click.argument("reports_file", type=click.Path(exists=True, dir_okay=False))
@click.option("--csv", "as_csv", is_flag=True, help="Emit CSV instead of a table.")
@_cli_errors
def sim_report(reports_file: str, as_csv: bool) -> None:
    """Summarize a JSONL report file produced by `sim run`."""
    reports = reports_from_jsonl(Path(reports_file).read_text())
    rows = summarize(reports)
    if as_csv:
        click.echo(summary_csv(rows), nl=False)
    else:
        click.echo(format_table(rows))


if __name__ == "__main__":
    main()
