"""End-to-end extraction pipeline: prompts, model calls, parsing, scoring.

A step that fails anywhere (prompt assembly, model call, parsing) produces
an empty prediction plus a diagnostic; the run always completes. Output is
written incrementally so an interrupted run can resume.
"""

from __future__ import annotations

import json
import logging
import os
import threading
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

from ..extraction import (
    ExtractionDataset,
    ExtractionStep,
    PairLabel,
    StepPrediction,
)
from ..graph import ConnectorType
from .clients import ModelClient
from .parsing import StageOneOutput, parse_stage1, parse_stage2
from .prompts import build_stage1_prompt, build_stage2_prompt

log = logging.getLogger(__name__)

RESULTS_FORMAT_VERSION = 1


@dataclass(frozen=True)
class StepOutcome:
    step_index: int
    prediction: StepPrediction
    stage1: Optional[StageOneOutput]
    diagnostics: tuple[str, ...] = ()


@dataclass(frozen=True)
class PipelineRun:
    dataset: str
    outcomes: tuple[StepOutcome, ...]

    @property
    def predictions(self) -> tuple[StepPrediction, ...]:
        return tuple(o.prediction for o in self.outcomes)


def _run_step(step: ExtractionStep, client: ModelClient) -> StepOutcome:
    diagnostics: list[str] = []
    stage1: Optional[StageOneOutput] = None
    try:
        raw1 = client.send(build_stage1_prompt(step))
        stage1 = parse_stage1(raw1, step)
        diagnostics.extend(stage1.warnings)
        raw2 = client.send(build_stage2_prompt(step, stage1))
        prediction = parse_stage2(raw2, step, stage1)
        diagnostics.extend(prediction.warnings)
        budget_total = sum(step.connector_budget.values())
        if len(prediction.pairs) != budget_total:
            diagnostics.append(
                f"predicted {len(prediction.pairs)} pairings against a budget of {budget_total}"
            )
    except Exception as exc:  # any failure collapses to an empty prediction
        log.warning("step %d failed: %s", step.step_index, exc)
        diagnostics.append(f"{type(exc).__name__}: {exc}")
        prediction = StepPrediction(step_index=step.step_index)
    return StepOutcome(
        step_index=step.step_index,
        prediction=prediction,
        stage1=stage1,
        diagnostics=tuple(diagnostics),
    )


def _results_to_doc(dataset_name: str, outcomes: dict[int, StepOutcome]) -> dict:
    return {
        "format_version": RESULTS_FORMAT_VERSION,
        "dataset": dataset_name,
        "results": [
            {
                "step_index": o.step_index,
                "pairs": [p.to_dict() for p in o.prediction.pairs],
                "diagnostics": list(o.diagnostics),
            }
            for _, o in sorted(outcomes.items())
        ],
    }


def _outcomes_from_doc(doc: dict) -> dict[int, StepOutcome]:
    out: dict[int, StepOutcome] = {}
    if doc.get("format_version") != RESULTS_FORMAT_VERSION:
        return out
    for entry in doc.get("results", []):
        idx = int(entry["step_index"])
        pairs = []
        for pd in entry.get("pairs", []):
            ctype = pd.get("connector_type")
            pairs.append(
                PairLabel(
                    a=str(pd["a"]),
                    b=str(pd["b"]),
                    connector_type=ConnectorType.from_str(ctype) if ctype else None,
                )
            )
        out[idx] = StepOutcome(
            step_index=idx,
            prediction=StepPrediction(step_index=idx, pairs=tuple(pairs)),
            stage1=None,
            diagnostics=tuple(str(d) for d in entry.get("diagnostics", [])),
        )
    return out


def _atomic_write(path: Path, doc: dict) -> None:
    tmp = path.with_suffix(path.suffix + ".tmp")
    tmp.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")
    os.replace(tmp, path)


def run_pipeline(
    dataset: ExtractionDataset,
    client: ModelClient,
    *,
    out_path=None,
    resume: bool = False,
    parallelism: int = 1,
) -> PipelineRun:
    """Run both stages over every step of the dataset.

    With ``out_path`` the results file is rewritten atomically after each
    completed step; ``resume=True`` skips steps already present in it.
    Parallel execution is only used when the client declares itself
    concurrency-safe.
    """
    out_file = Path(out_path) if out_path is not None else None
    outcomes: dict[int, StepOutcome] = {}
    if resume and out_file is not None and out_file.exists():
        outcomes = _outcomes_from_doc(json.loads(out_file.read_text()))
        if outcomes:
            log.info("resuming: %d step(s) already done", len(outcomes))

    pending = [s for s in dataset.steps if s.step_index not in outcomes]
    lock = threading.Lock()

    def finish(outcome: StepOutcome) -> None:
        with lock:
            outcomes[outcome.step_index] = outcome
            if out_file is not None:
                _atomic_write(out_file, _results_to_doc(dataset.name, outcomes))

    workers = max(1, parallelism)
    if workers > 1 and getattr(client, "concurrency_safe", False):
        with ThreadPoolExecutor(max_workers=workers) as pool:
            for outcome in pool.map(lambda s: _run_step(s, client), pending):
                finish(outcome)
    else:
        if workers > 1:
            log.info("client is not concurrency-safe; running serially")
        for step in pending:
            finish(_run_step(step, client))

    ordered = tuple(outcomes[s.step_index] for s in dataset.steps if s.step_index in outcomes)
    return PipelineRun(dataset=dataset.name, outcomes=ordered)


def oracle_script(dataset: ExtractionDataset) -> dict:
    """Scripted responses that reproduce the dataset's ground truth.

    Stage-1 answers count the truth endpoints per component; when a step
    mixes connector types each component reports its most frequent one, and
    the stage-2 entries carry explicit per-pair types to compensate.
    """
    responses: dict[tuple[int, int], str] = {}
    for step in dataset.steps:
        owner: dict[str, str] = {}
        for comp in step.components:
            for cand in comp.candidates:
                owner[cand] = comp.node
        per_component: dict[str, Counter] = {c.node: Counter() for c in step.components}
        for pair in step.truth_pairs:
            ctype = pair.connector_type or ConnectorType.MORTISE_TENON
            for point in (pair.a, pair.b):
                comp = owner.get(point)
                if comp is not None:
                    per_component[comp][ctype.value] += 1

        stage1_doc = {}
        for comp in step.components:
            counts = per_component[comp.node]
            total = sum(counts.values())
            if total:
                # deterministic tie-break: enum declaration order
                best = max(
                    counts,
                    key=lambda name: (counts[name], -list(ConnectorType).index(ConnectorType(name))),
                )
            else:
                best = ConnectorType.MORTISE_TENON.value
            stage1_doc[comp.node] = [total, best]
        responses[(step.step_index, 1)] = json.dumps(stage1_doc)

        mixed = len([v for v in step.connector_budget.values() if v > 0]) > 1
        entries = []
        for pair in step.truth_pairs:
            if mixed and pair.connector_type is not None:
                entries.append([pair.a, pair.b, pair.connector_type.value])
            else:
                entries.append([pair.a, pair.b])
        responses[(step.step_index, 2)] = json.dumps(entries)
    return responses
