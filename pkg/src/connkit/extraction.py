"""Connection-extraction datasets, scoring, and the random baseline.

A dataset is a sequence of steps. Each step presents two or more components
(with their candidate attachment points), a connector budget, and the true
set of point pairings. Predictions are scored as unordered pairs.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Optional, Sequence

import numpy as np

from .errors import InsufficientCandidates, ParseError, SchemaError, StepMismatch
from .graph import AssemblyGraph, ConnectorType

FORMAT_VERSION = 1


@dataclass(frozen=True)
class PairLabel:
    """One predicted or true pairing of two attachment points."""

    a: str
    b: str
    connector_type: Optional[ConnectorType] = None

    def key(self, with_type: bool) -> tuple:
        lo, hi = (self.a, self.b) if self.a <= self.b else (self.b, self.a)
        if with_type:
            return (lo, hi, self.connector_type.value if self.connector_type else None)
        return (lo, hi)

    def to_dict(self) -> dict:
        out = {"a": self.a, "b": self.b}
        if self.connector_type is not None:
            out["connector_type"] = self.connector_type.value
        return out


@dataclass(frozen=True)
class StepComponent:
    node: str
    candidates: tuple[str, ...]
    image: Optional[str] = None


@dataclass(frozen=True)
class ExtractionStep:
    step_index: int
    components: tuple[StepComponent, ...]
    connector_budget: Mapping[str, int]
    truth_pairs: tuple[PairLabel, ...]
    manual_present: bool = True
    manual_image: Optional[str] = None

    def candidate_union(self) -> tuple[str, ...]:
        out: list[str] = []
        for comp in self.components:
            out.extend(comp.candidates)
        return tuple(out)


@dataclass(frozen=True)
class ExtractionDataset:
    name: str
    steps: tuple[ExtractionStep, ...]

    def step(self, index: int) -> ExtractionStep:
        for s in self.steps:
            if s.step_index == index:
                return s
        raise StepMismatch(f"dataset {self.name!r} has no step {index}")


@dataclass(frozen=True)
class StepPrediction:
    step_index: int
    pairs: tuple[PairLabel, ...] = ()
    warnings: tuple[str, ...] = ()


@dataclass(frozen=True)
class ExtractionScore:
    pair_f1: float
    pair_success: float
    set_f1: float
    set_success: float

    def to_dict(self) -> dict:
        return {
            "pair_f1": self.pair_f1,
            "pair_success": self.pair_success,
            "set_f1": self.set_f1,
            "set_success": self.set_success,
        }


@dataclass(frozen=True)
class DatasetScore:
    pair_f1: float
    pair_success: float
    set_f1: float
    set_success: float
    per_step: tuple[ExtractionScore, ...] = field(default=())

    def to_dict(self) -> dict:
        return {
            "pair_f1": self.pair_f1,
            "pair_success": self.pair_success,
            "set_f1": self.set_f1,
            "set_success": self.set_success,
            "steps": [s.to_dict() for s in self.per_step],
        }


def _f1(tp: int, fp: int, fn: int) -> float:
    denom = 2 * tp + fp + fn
    if denom == 0:
        # Nothing predicted and nothing to predict: a perfect (empty) answer.
        return 1.0
    return 2.0 * tp / denom


def _set_scores(truth: set, pred: set) -> tuple[float, float]:
    tp = len(truth & pred)
    fp = len(pred - truth)
    fn = len(truth - pred)
    return _f1(tp, fp, fn), 1.0 if truth == pred else 0.0


def score_step(
    truth: ExtractionStep,
    prediction: Optional[StepPrediction],
    *,
    require_type_match: bool = True,
) -> ExtractionScore:
    """Score one step; a missing prediction counts as an empty one."""
    if prediction is not None and prediction.step_index != truth.step_index:
        raise StepMismatch(
            f"prediction for step {prediction.step_index} scored against step {truth.step_index}"
        )
    pred_pairs = set() if prediction is None else {p.key(require_type_match) for p in prediction.pairs}
    truth_pairs = {p.key(require_type_match) for p in truth.truth_pairs}
    pair_f1, pair_success = _set_scores(truth_pairs, pred_pairs)

    pred_ids = set()
    if prediction is not None:
        for p in prediction.pairs:
            pred_ids.add(p.a)
            pred_ids.add(p.b)
    truth_ids = set()
    for p in truth.truth_pairs:
        truth_ids.add(p.a)
        truth_ids.add(p.b)
    set_f1, set_success = _set_scores(truth_ids, pred_ids)
    return ExtractionScore(
        pair_f1=pair_f1, pair_success=pair_success, set_f1=set_f1, set_success=set_success
    )


def score_dataset(
    dataset: ExtractionDataset,
    predictions: Iterable[StepPrediction],
    *,
    require_type_match: bool = True,
) -> DatasetScore:
    by_index: dict[int, StepPrediction] = {}
    known = {s.step_index for s in dataset.steps}
    for pred in predictions:
        if pred.step_index not in known:
            raise StepMismatch(f"prediction for unknown step {pred.step_index}")
        if pred.step_index in by_index:
            raise StepMismatch(f"duplicate prediction for step {pred.step_index}")
        by_index[pred.step_index] = pred

    per_step = tuple(
        score_step(step, by_index.get(step.step_index), require_type_match=require_type_match)
        for step in dataset.steps
    )
    n = len(per_step)
    if n == 0:
        return DatasetScore(1.0, 1.0, 1.0, 1.0, per_step=())
    return DatasetScore(
        pair_f1=sum(s.pair_f1 for s in per_step) / n,
        pair_success=sum(s.pair_success for s in per_step) / n,
        set_f1=sum(s.set_f1 for s in per_step) / n,
        set_success=sum(s.set_success for s in per_step) / n,
        per_step=per_step,
    )


# ---------------------------------------------------------------------------
# Random baseline


def _budget_units(step: ExtractionStep) -> list[ConnectorType]:
    units: list[ConnectorType] = []
    for ctype in ConnectorType:  # canonical order = enum declaration order
        count = int(step.connector_budget.get(ctype.value, 0))
        units.extend([ctype] * count)
    return units


def _cross_component_pairs(step: ExtractionStep, used: set) -> list[tuple[str, str]]:
    """All ordered-by-component pairs of unused points on distinct components."""
    comps = step.components
    out: list[tuple[str, str]] = []
    for i in range(len(comps)):
        for j in range(i + 1, len(comps)):
            for a in comps[i].candidates:
                if a in used:
                    continue
                for b in comps[j].candidates:
                    if b not in used:
                        out.append((a, b))
    return out


def random_baseline(step: ExtractionStep, seed) -> StepPrediction:
    """Draw one baseline prediction: uniform pairings without replacement.

    Each budgeted connector unit picks uniformly among every pair of unused
    points lying on two different components; both endpoints then leave the
    pool. Raises InsufficientCandidates when the pool runs dry.
    """
    rng = np.random.default_rng(seed)
    used: set = set()
    pairs: list[PairLabel] = []
    for ctype in _budget_units(step):
        pool = _cross_component_pairs(step, used)
        if not pool:
            raise InsufficientCandidates(
                f"step {step.step_index}: no unused cross-component pair left for {ctype.value}"
            )
        a, b = pool[int(rng.integers(len(pool)))]
        used.add(a)
        used.add(b)
        pairs.append(PairLabel(a=a, b=b, connector_type=ctype))
    return StepPrediction(step_index=step.step_index, pairs=tuple(pairs))


def enumerate_baseline(step: ExtractionStep) -> list[tuple[StepPrediction, float]]:
    """Exact outcome distribution of the random baseline for small steps.

    Returns (prediction, probability) for every ordered draw sequence; the
    probabilities sum to 1. Exponential in the budget, so fixture-sized
    steps only.
    """
    units = _budget_units(step)
    outcomes: list[tuple[StepPrediction, float]] = []

    def rec(idx: int, used: set, acc: list[PairLabel], prob: float) -> None:
        if idx == len(units):
            outcomes.append(
                (StepPrediction(step_index=step.step_index, pairs=tuple(acc)), prob)
            )
            return
        pool = _cross_component_pairs(step, used)
        if not pool:
            raise InsufficientCandidates(
                f"step {step.step_index}: no unused cross-component pair left for {units[idx].value}"
            )
        p = prob / len(pool)
        for a, b in pool:
            acc.append(PairLabel(a=a, b=b, connector_type=units[idx]))
            rec(idx + 1, used | {a, b}, acc, p)
            acc.pop()

    rec(0, set(), [], 1.0)
    return outcomes


def baseline_success_probability(step: ExtractionStep, require_type_match: bool = True) -> float:
    """Exact probability that a random draw reproduces the truth set."""
    truth = {p.key(require_type_match) for p in step.truth_pairs}
    total = 0.0
    for pred, prob in enumerate_baseline(step):
        if {p.key(require_type_match) for p in pred.pairs} == truth:
            total += prob
    return total


# ---------------------------------------------------------------------------
# Dataset construction and serialization


def dataset_from_graph(graph: AssemblyGraph) -> ExtractionDataset:
    """Derive the extraction dataset a product graph implies.

    One step per connection edge in assembly order. Components carry every
    attachment point of their leaf parts as candidates. Image references are
    placeholder asset paths.
    """
    steps = []
    for idx, name in enumerate(graph.step_order, start=1):
        edge = graph.edge(name)
        comps = []
        for node_id in edge.nodes:
            cands: list[str] = []
            for pid in graph.leaf_parts(node_id):
                cands.extend(graph.parts[pid].keys())
            comps.append(
                StepComponent(
                    node=node_id,
                    candidates=tuple(cands),
                    image=f"assets/{graph.name}/{node_id}.png",
                )
            )
        budget: dict[str, int] = {}
        truth = []
        for inst in edge.instances:
            budget[inst.connector_type.value] = budget.get(inst.connector_type.value, 0) + 1
            truth.append(
                PairLabel(a=inst.end_a[1], b=inst.end_b[1], connector_type=inst.connector_type)
            )
        steps.append(
            ExtractionStep(
                step_index=idx,
                components=tuple(comps),
                connector_budget=budget,
                truth_pairs=tuple(truth),
                manual_present=True,
                manual_image=f"assets/{graph.name}/step{idx:02d}.png",
            )
        )
    return ExtractionDataset(name=graph.name, steps=tuple(steps))


def dataset_to_dict(dataset: ExtractionDataset) -> dict:
    return {
        "format_version": FORMAT_VERSION,
        "name": dataset.name,
        "steps": [
            {
                "step_index": s.step_index,
                "manual_present": s.manual_present,
                "manual_image": s.manual_image,
                "components": [
                    {"node": c.node, "candidates": list(c.candidates), "image": c.image}
                    for c in s.components
                ],
                "connector_budget": dict(s.connector_budget),
                "truth_pairs": [p.to_dict() for p in s.truth_pairs],
            }
            for s in dataset.steps
        ],
    }


def _pair_from_dict(d: Mapping, where: str) -> PairLabel:
    try:
        a = str(d["a"])
        b = str(d["b"])
    except (KeyError, TypeError):
        raise SchemaError("pair needs 'a' and 'b'", field=where) from None
    ctype = d.get("connector_type")
    return PairLabel(a=a, b=b, connector_type=ConnectorType.from_str(ctype) if ctype else None)


def dataset_from_dict(doc: Mapping) -> ExtractionDataset:
    version = doc.get("format_version")
    if version != FORMAT_VERSION:
        raise SchemaError(f"unsupported dataset format_version {version!r}", field="format_version")
    steps = []
    for i, sd in enumerate(doc.get("steps", [])):
        where = f"steps[{i}]"
        comps = tuple(
            StepComponent(
                node=str(cd["node"]),
                candidates=tuple(str(x) for x in cd.get("candidates", [])),
                image=cd.get("image"),
            )
            for cd in sd.get("components", [])
        )
        budget = {str(k): int(v) for k, v in sd.get("connector_budget", {}).items()}
        for key in budget:
            ConnectorType.from_str(key)  # reject unknown types early
        steps.append(
            ExtractionStep(
                step_index=int(sd["step_index"]),
                components=comps,
                connector_budget=budget,
                truth_pairs=tuple(
                    _pair_from_dict(pd, f"{where}.truth_pairs[{j}]")
                    for j, pd in enumerate(sd.get("truth_pairs", []))
                ),
                manual_present=bool(sd.get("manual_present", True)),
                manual_image=sd.get("manual_image"),
            )
        )
    return ExtractionDataset(name=str(doc.get("name", "dataset")), steps=tuple(steps))


def predictions_to_dict(predictions: Sequence[StepPrediction], dataset_name: str = "") -> dict:
    return {
        "format_version": FORMAT_VERSION,
        "dataset": dataset_name,
        "predictions": [
            {
                "step_index": p.step_index,
                "pairs": [pl.to_dict() for pl in p.pairs],
                **({"warnings": list(p.warnings)} if p.warnings else {}),
            }
            for p in predictions
        ],
    }


def predictions_from_dict(doc: Mapping) -> tuple[StepPrediction, ...]:
    version = doc.get("format_version")
    if version != FORMAT_VERSION:
        raise SchemaError(
            f"unsupported predictions format_version {version!r}", field="format_version"
        )
    # Pipeline result files carry the same entries under "results".
    entries = doc.get("predictions", doc.get("results", []))
    out = []
    for i, pd in enumerate(entries):
        where = f"predictions[{i}]"
        out.append(
            StepPrediction(
                step_index=int(pd["step_index"]),
                pairs=tuple(
                    _pair_from_dict(x, f"{where}.pairs[{j}]")
                    for j, x in enumerate(pd.get("pairs", []))
                ),
                warnings=tuple(str(w) for w in pd.get("warnings", [])),
            )
        )
    return tuple(out)


def _load_json(path) -> dict:
    text = Path(path).read_text()
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: {exc.msg}", line=exc.lineno) from None


def load_dataset_file(path) -> ExtractionDataset:
    return dataset_from_dict(_load_json(path))


def save_dataset_file(dataset: ExtractionDataset, path) -> None:
    Path(path).write_text(json.dumps(dataset_to_dict(dataset), indent=2, sort_keys=True) + "\n")


def load_predictions_file(path) -> tuple[StepPrediction, ...]:
    return predictions_from_dict(_load_json(path))


def save_predictions_file(predictions: Sequence[StepPrediction], path, dataset_name: str = "") -> None:
    doc = predictions_to_dict(predictions, dataset_name)
    Path(path).write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")
