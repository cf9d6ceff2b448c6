"""Prompt assembly for the two-stage extraction queries.

Templates live next to this module and carry a version header. The first
three lines of every rendered prompt are stable machine-readable markers
(Prompt-Version / Stage / Step) so scripted clients and replay files can key
on them without parsing prose.
"""

from __future__ import annotations

from dataclasses import dataclass
from importlib import resources

from ..errors import MissingAsset, PromptInputError
from ..extraction import ExtractionStep
from .parsing import StageOneOutput

GLOSSARY = {
    "mortise_tenon": "a rectangular tenon on one part slots into a matching mortise",
    "dowel": "a cylindrical wooden pin pressed into round holes on both parts",
    "screw": "a threaded fastener driven through one part into the other",
}


@dataclass(frozen=True)
class PromptBundle:
    """A rendered prompt plus the image references it mentions."""

    text: str
    images: tuple[str, ...]
    stage: int
    step_index: int


def _template(name: str) -> str:
    return resources.files("connkit.vlm.templates").joinpath(name).read_text()


def _glossary_lines() -> str:
    return "\n".join(f"- {key}: {desc}" for key, desc in GLOSSARY.items())


def _check_components(step: ExtractionStep) -> None:
    if len(step.components) < 2:
        raise PromptInputError(
            f"step {step.step_index} has {len(step.components)} component(s); need at least two"
        )


def _collect_images(step: ExtractionStep) -> list[str]:
    images = []
    if step.manual_present:
        if not step.manual_image:
            raise MissingAsset(f"step {step.step_index}: manual page reference is missing")
        images.append(step.manual_image)
    for comp in step.components:
        if not comp.image:
            raise MissingAsset(
                f"step {step.step_index}: no image reference for component {comp.node!r}"
            )
        images.append(comp.image)
    return images


def build_stage1_prompt(step: ExtractionStep) -> PromptBundle:
    _check_components(step)
    images = _collect_images(step)
    if step.manual_present:
        manual_clause = ", together with the manual page for the step"
    else:
        manual_clause = (
            ". The manual page for this step is unavailable; judge from the "
            "component images alone"
        )
    component_lines = "\n".join(
        f"- {comp.node} (image: {comp.image})" for comp in step.components
    )
    text = _template("stage1_v1.txt").format(
        step_index=step.step_index,
        manual_clause=manual_clause,
        component_lines=component_lines,
        glossary=_glossary_lines(),
    )
    return PromptBundle(text=text, images=tuple(images), stage=1, step_index=step.step_index)


def build_stage2_prompt(step: ExtractionStep, stage1: StageOneOutput) -> PromptBundle:
    _check_components(step)
    images = _collect_images(step)
    component_lines = "\n".join(
        f"- {comp.node} (image: {comp.image}): points {', '.join(comp.candidates)}"
        for comp in step.components
    )
    if stage1.entries:
        summary = "\n".join(
            f"- {name}: {count} x {ctype.value}"
            for name, (count, ctype) in stage1.entries.items()
        )
    else:
        summary = "- (no connector counts were recovered)"
    text = _template("stage2_v1.txt").format(
        step_index=step.step_index,
        component_lines=component_lines,
        stage1_summary=summary,
    )
    return PromptBundle(text=text, images=tuple(images), stage=2, step_index=step.step_index)
