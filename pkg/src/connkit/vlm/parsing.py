"""Tolerant parsing of model responses for both query stages.

Models wrap JSON in prose, fences, or both; connector names arrive in many
spellings. The parsers here recover the JSON payload, normalize names via a
synonym table, and collect warnings instead of failing wherever a defensible
reading exists. ``strict=True`` turns every warning into an error.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from typing import Optional

from ..errors import UnparseableResponse
from ..extraction import ExtractionStep, PairLabel, StepPrediction
from ..graph import ConnectorType

_FENCE = re.compile(r"```(?:json)?\s*\n(.*?)```", re.DOTALL)

_SYNONYMS = {
    "mortise tenon": ConnectorType.MORTISE_TENON,
    "mortise and tenon": ConnectorType.MORTISE_TENON,
    "mortise-and-tenon": ConnectorType.MORTISE_TENON,
    "tenon": ConnectorType.MORTISE_TENON,
    "mortise": ConnectorType.MORTISE_TENON,
    "cam tenon": ConnectorType.MORTISE_TENON,
    "dowel": ConnectorType.DOWEL,
    "wooden dowel": ConnectorType.DOWEL,
    "wood dowel": ConnectorType.DOWEL,
    "dowel pin": ConnectorType.DOWEL,
    "peg": ConnectorType.DOWEL,
    "pin": ConnectorType.DOWEL,
    "screw": ConnectorType.SCREW,
    "screws": ConnectorType.SCREW,
    "wood screw": ConnectorType.SCREW,
    "machine screw": ConnectorType.SCREW,
    "bolt": ConnectorType.SCREW,
}


def normalize_connector(raw: str) -> ConnectorType:
    """Map a free-form connector name onto the canonical enum."""
    cleaned = re.sub(r"[-_/]", " ", str(raw).strip().lower())
    cleaned = re.sub(r"\s+", " ", cleaned)
    if cleaned in _SYNONYMS:
        return _SYNONYMS[cleaned]
    raise UnparseableResponse(f"unknown connector type {raw!r}", span=str(raw)[:80])


def extract_json(raw: str):
    """Pull the JSON payload out of a possibly chatty response."""
    text = raw.strip()
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        pass
    for match in _FENCE.finditer(raw):
        try:
            return json.loads(match.group(1))
        except json.JSONDecodeError:
            continue
    decoder = json.JSONDecoder()
    for i, ch in enumerate(raw):
        if ch in "{[":
            try:
                value, _ = decoder.raw_decode(raw[i:])
                return value
            except json.JSONDecodeError:
                continue
    raise UnparseableResponse("no JSON payload found in response", span=raw[:80])


@dataclass(frozen=True)
class StageOneOutput:
    """Per-component connector counts: name -> (count, type)."""

    entries: dict[str, tuple[int, ConnectorType]]
    warnings: tuple[str, ...] = ()

    def budget(self) -> dict[str, int]:
        """Connector pairs implied by the counts: two endpoints per unit."""
        totals: dict[str, int] = {}
        for count, ctype in self.entries.values():
            totals[ctype.value] = totals.get(ctype.value, 0) + count
        return {k: v // 2 for k, v in totals.items()}


def _coerce_count(value, where: str) -> int:
    if isinstance(value, bool):
        raise UnparseableResponse(f"{where}: boolean is not a count")
    if isinstance(value, int):
        n = value
    elif isinstance(value, float) and value.is_integer():
        n = int(value)
    elif isinstance(value, str) and value.strip().isdigit():
        n = int(value.strip())
    else:
        raise UnparseableResponse(f"{where}: cannot read {value!r} as a count")
    if n < 0:
        raise UnparseableResponse(f"{where}: negative connector count")
    return n


def parse_stage1(
    raw: str,
    step: Optional[ExtractionStep] = None,
    *,
    strict: bool = False,
) -> StageOneOutput:
    """Parse the per-component count/type stage.

    Accepted entry shapes: [count, type], [type, count], or an object with
    "count" and "type" keys. Component names the step does not know are kept
    and flagged rather than dropped.
    """
    data = extract_json(raw)
    if not isinstance(data, dict):
        raise UnparseableResponse("stage-1 response must be a JSON object", span=raw[:80])
    warnings: list[str] = []
    entries: dict[str, tuple[int, ConnectorType]] = {}
    for name, value in data.items():
        where = f"component {name!r}"
        if isinstance(value, dict):
            count = _coerce_count(value.get("count"), where)
            ctype = normalize_connector(value.get("type", ""))
        elif isinstance(value, (list, tuple)) and len(value) == 2:
            first, second = value
            if isinstance(first, str) and not str(first).strip().isdigit():
                ctype = normalize_connector(first)
                count = _coerce_count(second, where)
            else:
                count = _coerce_count(first, where)
                ctype = normalize_connector(second)
        else:
            raise UnparseableResponse(f"{where}: expected [count, type] or an object")
        entries[str(name)] = (count, ctype)

    if step is not None:
        known = {c.node for c in step.components}
        for name in entries:
            if name not in known:
                warnings.append(f"component {name!r} is not part of step {step.step_index}")
    totals: dict[str, int] = {}
    for count, ctype in entries.values():
        totals[ctype.value] = totals.get(ctype.value, 0) + count
    for ctype_name, total in sorted(totals.items()):
        if total % 2 != 0:
            warnings.append(f"odd total of {total} {ctype_name} endpoints across components")

    if strict and warnings:
        raise UnparseableResponse("; ".join(warnings))
    return StageOneOutput(entries=entries, warnings=tuple(warnings))


def _single_budget_type(step: ExtractionStep) -> Optional[ConnectorType]:
    present = [k for k, v in step.connector_budget.items() if v > 0]
    if len(present) == 1:
        return ConnectorType.from_str(present[0])
    return None


def _owner_component(step: ExtractionStep, point: str) -> Optional[str]:
    for comp in step.components:
        if point in comp.candidates:
            return comp.node
    return None


def parse_stage2(
    raw: str,
    step: ExtractionStep,
    stage1: Optional[StageOneOutput] = None,
    *,
    strict: bool = False,
) -> StepPrediction:
    """Parse the pairing stage into a StepPrediction.

    Accepted entry shapes: ["a", "b"], ["a", "b", type], or an object with
    "a"/"b" and an optional "connector_type". Unknown point ids are kept (they
    score as false positives) but flagged. Pair types fall back to the
    stage-1 type of the endpoint's component, then to the step budget when it
    names a single type.
    """
    data = extract_json(raw)
    if isinstance(data, dict) and "pairs" in data:
        data = data["pairs"]
    if not isinstance(data, list):
        raise UnparseableResponse("stage-2 response must be a JSON array of pairs", span=raw[:80])

    known = set(step.candidate_union())
    fallback = _single_budget_type(step)
    warnings: list[str] = []
    pairs: list[PairLabel] = []
    seen: set[tuple] = set()
    for idx, entry in enumerate(data):
        where = f"pairs[{idx}]"
        ctype: Optional[ConnectorType] = None
        if isinstance(entry, dict):
            try:
                a, b = str(entry["a"]), str(entry["b"])
            except KeyError:
                raise UnparseableResponse(f"{where}: object needs 'a' and 'b'") from None
            if entry.get("connector_type"):
                ctype = normalize_connector(entry["connector_type"])
        elif isinstance(entry, (list, tuple)) and len(entry) in (2, 3):
            a, b = str(entry[0]), str(entry[1])
            if len(entry) == 3:
                ctype = normalize_connector(entry[2])
        else:
            raise UnparseableResponse(f"{where}: expected [a, b] or [a, b, type]")

        for point in (a, b):
            if point not in known:
                warnings.append(f"{where}: unknown candidate id {point!r}")
        if a == b:
            warnings.append(f"{where}: pair joins a point to itself")
        if ctype is None and stage1 is not None:
            owner = _owner_component(step, a) or _owner_component(step, b)
            if owner is not None and owner in stage1.entries:
                ctype = stage1.entries[owner][1]
        if ctype is None:
            ctype = fallback
        key = (min(a, b), max(a, b))
        if key in seen:
            warnings.append(f"{where}: duplicate pairing {key}")
        seen.add(key)
        pairs.append(PairLabel(a=a, b=b, connector_type=ctype))

    if strict and warnings:
        raise UnparseableResponse("; ".join(warnings))
    return StepPrediction(step_index=step.step_index, pairs=tuple(pairs), warnings=tuple(warnings))
