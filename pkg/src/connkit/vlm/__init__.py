from .clients import (
    HttpModelClient,
    ModelCallFailed,
    ModelClient,
    RecordingClient,
    ReplayClient,
    ScriptedClient,
    prompt_key,
)
from .parsing import StageOneOutput, extract_json, normalize_connector, parse_stage1, parse_stage2
from .pipeline import PipelineRun, StepOutcome, oracle_script, run_pipeline
from .prompts import GLOSSARY, PromptBundle, build_stage1_prompt, build_stage2_prompt

__all__ = [
    "GLOSSARY",
    "HttpModelClient",
    "ModelCallFailed",
    "ModelClient",
    "PipelineRun",
    "PromptBundle",
    "RecordingClient",
    "ReplayClient",
    "ScriptedClient",
    "StageOneOutput",
    "StepOutcome",
    "build_stage1_prompt",
    "build_stage2_prompt",
    "extract_json",
    "normalize_connector",
    "oracle_script",
    "parse_stage1",
    "parse_stage2",
    "prompt_key",
    "run_pipeline",
]
