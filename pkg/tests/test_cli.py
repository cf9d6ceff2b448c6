"""End-to-end CLI tests: exit codes, output files, config echo, determinism.

Everything runs through click's CliRunner; output files go to tmp_path so the
working tree stays clean.
"""

import json

import pytest
from click.testing import CliRunner

from connkit.cli import main
from connkit.extraction import load_dataset_file, load_predictions_file
from connkit.fixtures import fixture
from connkit.graph import graph_to_dict

runner = CliRunner()


def run(*args, env=None):
    return runner.invoke(main, list(args), env=env, catch_exceptions=False)


def write_graph(tmp_path, doc, name="graph.json"):
    path = tmp_path / name
    path.write_text(json.dumps(doc))
    return str(path)


# -- top level ----------------------------------------------------------------


def test_version_flag():
    result = run("--version")
    assert result.exit_code == 0
    assert "connkit" in result.output


def test_unknown_option_is_usage_error():
    result = run("graph", "validate", "--graph", "fixture:chair", "--nope")
    assert result.exit_code == 2


def test_unknown_fixture_is_usage_error():
    result = run("graph", "validate", "--graph", "fixture:bookcase")
    assert result.exit_code == 2
    assert "bookcase" in result.output


# -- graph --------------------------------------------------------------------


def test_validate_fixture_ok():
    result = run("graph", "validate", "--graph", "fixture:chair")
    assert result.exit_code == 0
    assert "valid" in result.output


def test_validate_reports_violations_with_exit_1(tmp_path):
    doc = graph_to_dict(fixture("shoe_shelf"))
    doc["step_order"] = doc["step_order"][:-1]
    result = run("graph", "validate", "--graph", write_graph(tmp_path, doc))
    assert result.exit_code == 1
    assert "violation" in result.output
    assert "step-order" in result.output


def test_validate_bad_json_exits_1(tmp_path):
    path = tmp_path / "broken.json"
    path.write_text("{not json")
    result = run("graph", "validate", "--graph", str(path))
    assert result.exit_code == 1


def test_plan_prints_and_writes(tmp_path):
    out = tmp_path / "plan.json"
    result = run("graph", "plan", "--graph", "fixture:shoe_shelf", "--out", str(out))
    assert result.exit_code == 0
    assert "11 operation(s)" in result.output
    doc = json.loads(out.read_text())
    assert doc["graph"] == "shoe_shelf"
    assert len(doc["operations"]) == 11
    assert doc["operations"][0]["index"] == 0

    config = json.loads((tmp_path / "plan.json.config.json").read_text())
    assert config["command"] == "graph plan"
    assert config["parameters"] == {"source": "fixture:shoe_shelf"}


def test_write_fixtures(tmp_path):
    target = tmp_path / "graphs"
    result = run("graph", "write-fixtures", str(target))
    assert result.exit_code == 0
    written = sorted(p.name for p in target.glob("*.json"))
    assert written == ["chair.json", "lego_person.json", "plane_model.json", "shoe_shelf.json"]


# -- pose ---------------------------------------------------------------------


def test_pose_solve_table_and_edge_json(tmp_path):
    result = run("pose", "solve", "--graph", "fixture:shoe_shelf")
    assert result.exit_code == 0
    assert "residual" in result.output

    result = run("pose", "solve", "--graph", "fixture:shoe_shelf", "--edge", "E1")
    assert result.exit_code == 0
    doc = json.loads(result.output)
    assert doc["edge"] == "E1"
    assert set(doc) >= {"op_id", "transform", "residual", "degeneracy", "held_node"}
    assert doc["residual"] < 1e-12


def test_pose_solve_unknown_edge_exits_1():
    result = run("pose", "solve", "--graph", "fixture:shoe_shelf", "--edge", "E99")
    assert result.exit_code == 1
    assert "E99" in result.output


def test_pose_eval_self_is_exact(tmp_path):
    poses = tmp_path / "poses.json"
    result = run("pose", "solve", "--graph", "fixture:chair", "--out", str(poses))
    assert result.exit_code == 0

    out = tmp_path / "metrics.json"
    result = run(
        "pose", "eval", str(poses), str(poses),
        "--graph", "fixture:chair", "--out", str(out),
    )
    assert result.exit_code == 0
    assert "100.00%" in result.output
    metrics = json.loads(out.read_text())
    # arccos near trace 3 is ill-conditioned; identical poses read back from
    # JSON land at ~1e-9 rather than exactly zero
    assert metrics["rotation_geodesic"] < 1e-7
    assert metrics["chamfer"] < 1e-12
    assert metrics["part_accuracy"] == 1.0


def test_pose_eval_missing_part_is_usage_error(tmp_path):
    poses = tmp_path / "poses.json"
    run("pose", "solve", "--graph", "fixture:chair", "--out", str(poses))
    doc = json.loads(poses.read_text())
    dropped = sorted(doc["parts"])[0]
    del doc["parts"][dropped]
    partial = tmp_path / "partial.json"
    partial.write_text(json.dumps(doc))

    result = run("pose", "eval", str(poses), str(partial), "--graph", "fixture:chair")
    assert result.exit_code == 2
    assert dropped in result.output


# -- extract ------------------------------------------------------------------


def test_extract_dataset_roundtrips(tmp_path):
    out = tmp_path / "ds.json"
    result = run("extract", "dataset", "fixture:shoe_shelf", "--out", str(out))
    assert result.exit_code == 0
    ds = load_dataset_file(out)
    assert ds.name == "shoe_shelf"
    assert len(ds.steps) == 4
    assert (tmp_path / "ds.json.config.json").exists()


def test_oracle_pipeline_then_eval_scores_one(tmp_path):
    results = tmp_path / "results.json"
    result = run(
        "extract", "run-pipeline", "fixture:shoe_shelf",
        "--oracle", "--out", str(results),
    )
    assert result.exit_code == 0
    assert "pair F1 1.0000" in result.output
    assert len(load_predictions_file(results)) == 4

    result = run(
        "extract", "eval", str(results),
        "--dataset", "fixture:shoe_shelf",
    )
    assert result.exit_code == 0
    assert "pair F1      : 1.0000" in result.output
    assert "set success  : 100.00%" in result.output


def test_run_pipeline_needs_exactly_one_mode(tmp_path):
    out = str(tmp_path / "r.json")
    result = run("extract", "run-pipeline", "fixture:shoe_shelf", "--out", out)
    assert result.exit_code == 2
    result = run(
        "extract", "run-pipeline", "fixture:shoe_shelf", "--out", out,
        "--oracle", "--endpoint", "https://model.test",
    )
    assert result.exit_code == 2


def test_random_baseline_exact(tmp_path):
    out = tmp_path / "p.json"
    result = run("extract", "random-baseline", "fixture:shoe_shelf", "--out", str(out))
    assert result.exit_code == 0
    assert "mean over 4 step(s)" in result.output
    doc = json.loads(out.read_text())
    assert doc["method"] == "exact"
    assert len(doc["per_step"]) == 4
    for entry in doc["per_step"]:
        assert 0.0 <= entry["success_probability"] <= 1.0


def test_random_baseline_sample_emits_predictions(tmp_path):
    out = tmp_path / "p.json"
    preds = tmp_path / "preds.json"
    result = run(
        "extract", "random-baseline", "fixture:shoe_shelf",
        "--method", "sample", "--samples", "50", "--seed", "3",
        "--emit-predictions", str(preds), "--out", str(out),
    )
    assert result.exit_code == 0
    loaded = load_predictions_file(preds)
    assert len(loaded) == 4
    for step_pred, budget in zip(loaded, (2, 4, 4, 1)):
        assert len(step_pred.pairs) >= 1
    doc = json.loads(out.read_text())
    assert doc["per_step"][0]["samples"] == 50


def test_random_baseline_reruns_byte_identical(tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    for out in (a, b):
        result = run(
            "extract", "random-baseline", "fixture:chair",
            "--method", "sample", "--samples", "40", "--out", str(out),
        )
        assert result.exit_code == 0
    assert a.read_bytes() == b.read_bytes()


def test_connkit_config_supplies_defaults(tmp_path):
    config = tmp_path / "defaults.json"
    config.write_text(json.dumps({"extract": {"random-baseline": {"seed": 7}}}))
    out = tmp_path / "p.json"
    result = run(
        "extract", "random-baseline", "fixture:shoe_shelf", "--out", str(out),
        env={"CONNKIT_CONFIG": str(config)},
    )
    assert result.exit_code == 0
    assert json.loads(out.read_text())["seed"] == 7


def test_connkit_config_missing_file_is_usage_error(tmp_path):
    result = run(
        "graph", "validate", "--graph", "fixture:chair",
        env={"CONNKIT_CONFIG": str(tmp_path / "absent.json")},
    )
    assert result.exit_code == 2
    assert "CONNKIT_CONFIG" in result.output


# -- sim ----------------------------------------------------------------------


def test_sim_run_writes_jsonl_and_config(tmp_path):
    out = tmp_path / "reports.jsonl"
    result = run(
        "sim", "run", "--graph", "fixture:shoe_shelf",
        "--strategy", "hybrid", "--trials", "2", "--ops", "E1.0",
        "--out", str(out),
    )
    assert result.exit_code == 0
    assert "hybrid" in result.output
    lines = out.read_text().splitlines()
    assert len(lines) == 2
    record = json.loads(lines[0])
    assert record["op_id"] == "E1.0"
    assert record["strategy"] == "hybrid"
    config = json.loads((tmp_path / "reports.jsonl.config.json").read_text())
    assert config["parameters"]["trials"] == 2


def test_sim_run_unknown_op_is_usage_error():
    result = run(
        "sim", "run", "--graph", "fixture:shoe_shelf",
        "--strategy", "hybrid", "--trials", "1", "--ops", "E9.9",
    )
    assert result.exit_code == 2


def test_sim_run_reruns_byte_identical(tmp_path):
    a, b = tmp_path / "a.jsonl", tmp_path / "b.jsonl"
    for out in (a, b):
        result = run(
            "sim", "run", "--graph", "fixture:shoe_shelf",
            "--strategy", "random", "--trials", "3", "--ops", "E1.0",
            "--out", str(out),
        )
        assert result.exit_code == 0
    assert a.read_bytes() == b.read_bytes()


def test_sim_report_table_and_csv(tmp_path):
    out = tmp_path / "reports.jsonl"
    run(
        "sim", "run", "--graph", "fixture:shoe_shelf",
        "--strategy", "grid", "--trials", "1", "--ops", "E1.0",
        "--out", str(out),
    )
    result = run("sim", "report", str(out))
    assert result.exit_code == 0
    assert "grid" in result.output
    result = run("sim", "report", str(out), "--csv")
    assert result.exit_code == 0
    assert result.output.splitlines()[0].startswith("task,strategy")


def test_sim_trace_dumps_trajectory(tmp_path):
    out = tmp_path / "trace.jsonl"
    result = run(
        "sim", "trace", "--graph", "fixture:shoe_shelf",
        "--op", "E1.0", "--strategy", "hybrid", "--out", str(out),
    )
    assert result.exit_code == 0
    assert "success=True" in result.output
    records = [json.loads(line) for line in out.read_text().splitlines()]
    assert len(records) > 10
    assert {"step", "command", "tip", "phase"} <= set(records[0])


def test_sim_trace_unknown_op_exits_1(tmp_path):
    result = run(
        "sim", "trace", "--graph", "fixture:shoe_shelf",
        "--op", "E9.9", "--out", str(tmp_path / "t.jsonl"),
    )
    assert result.exit_code == 1
