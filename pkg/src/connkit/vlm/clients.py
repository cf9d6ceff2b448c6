"""Model clients: scripted, replay, recording, and HTTP."""

from __future__ import annotations

import json
import os
import re
import time
from pathlib import Path
from typing import Callable, Optional, Protocol

import httpx

from ..errors import ConnkitError
from .prompts import PromptBundle

API_KEY_ENV = "CONNKIT_MODEL_KEY"

_STAGE_LINE = re.compile(r"^Stage:\s*(\d+)\s*$", re.MULTILINE)
_STEP_LINE = re.compile(r"^Step:\s*(\d+)\s*$", re.MULTILINE)


class ModelCallFailed(ConnkitError):
    """The model endpoint could not produce a response within the retry budget."""


class ModelClient(Protocol):
    concurrency_safe: bool

    def send(self, prompt: PromptBundle) -> str:
        ...


def prompt_key(prompt: PromptBundle) -> tuple[int, int]:
    """(step, stage) key recovered from the prompt's marker lines."""
    stage = _STAGE_LINE.search(prompt.text)
    step = _STEP_LINE.search(prompt.text)
    if not stage or not step:
        raise LookupError("prompt lacks Stage/Step marker lines")
    return int(step.group(1)), int(stage.group(1))


class ScriptedClient:
    """Returns canned responses keyed by (step, stage). Used in tests."""

    concurrency_safe = True

    def __init__(self, responses: dict, default: Optional[str] = None) -> None:
        self.responses = dict(responses)
        self.default = default
        self.calls: list[tuple[int, int]] = []

    def send(self, prompt: PromptBundle) -> str:
        key = prompt_key(prompt)
        self.calls.append(key)
        if key in self.responses:
            return self.responses[key]
        if self.default is not None:
            return self.default
        raise LookupError(f"no scripted response for step {key[0]} stage {key[1]}")


class ReplayClient:
    """Replays responses stored by RecordingClient."""

    concurrency_safe = True

    def __init__(self, path) -> None:
        doc = json.loads(Path(path).read_text())
        if doc.get("format_version") != 1:
            raise ConnkitError(f"unsupported replay format_version {doc.get('format_version')!r}")
        self.responses = {k: str(v) for k, v in doc.get("responses", {}).items()}

    def send(self, prompt: PromptBundle) -> str:
        step, stage = prompt_key(prompt)
        key = f"{step}:{stage}"
        if key not in self.responses:
            raise LookupError(f"replay file holds no response for step {step} stage {stage}")
        return self.responses[key]


class RecordingClient:
    """Wraps another client and records every exchange for later replay."""

    def __init__(self, inner: ModelClient) -> None:
        self.inner = inner
        self.concurrency_safe = False  # the recording dict is shared state
        self.responses: dict[str, str] = {}

    def send(self, prompt: PromptBundle) -> str:
        response = self.inner.send(prompt)
        step, stage = prompt_key(prompt)
        self.responses[f"{step}:{stage}"] = response
        return response

    def save(self, path) -> None:
        doc = {"format_version": 1, "responses": dict(sorted(self.responses.items()))}
        Path(path).write_text(json.dumps(doc, indent=2) + "\n")


class HttpModelClient:
    """POSTs prompts to a JSON endpoint with retry and backoff.

    The request body is {"model", "prompt", "images"}; the response body must
    carry the completion under "text". Authentication uses a bearer token
    from ``api_key`` or the CONNKIT_MODEL_KEY environment variable. Retries
    cover transport errors, 429 and 5xx, with exponential backoff.
    """

    concurrency_safe = False  # one httpx.Client, one connection pool

    def __init__(
        self,
        endpoint: str,
        model: str,
        *,
        api_key: Optional[str] = None,
        timeout: float = 30.0,
        max_retries: int = 3,
        backoff_base: float = 0.5,
        transport: Optional[httpx.BaseTransport] = None,
        sleep: Callable[[float], None] = time.sleep,
    ) -> None:
        self.endpoint = endpoint
        self.model = model
        self.api_key = api_key if api_key is not None else os.environ.get(API_KEY_ENV)
        self.max_retries = max_retries
        self.backoff_base = backoff_base
        self._sleep = sleep
        self._client = httpx.Client(timeout=timeout, transport=transport)

    def close(self) -> None:
        self._client.close()

    def send(self, prompt: PromptBundle) -> str:
        headers = {}
        if self.api_key:
            headers["Authorization"] = f"Bearer {self.api_key}"
        body = {
            "model": self.model,
            "prompt": prompt.text,
            "images": list(prompt.images),
        }
        last_error: Exception | None = None
        for attempt in range(self.max_retries + 1):
            if attempt:
                self._sleep(self.backoff_base * 2 ** (attempt - 1))
            try:
                response = self._client.post(self.endpoint, json=body, headers=headers)
            except httpx.TransportError as exc:
                last_error = exc
                continue
            if response.status_code == 429 or response.status_code >= 500:
                last_error = ModelCallFailed(
                    f"endpoint returned {response.status_code} for step {prompt.step_index}"
                )
                continue
            if response.status_code != 200:
                raise ModelCallFailed(
                    f"endpoint returned {response.status_code} for step {prompt.step_index}"
                )
            try:
                return str(response.json()["text"])
            except (KeyError, ValueError) as exc:
                raise ModelCallFailed(f"malformed endpoint response: {exc}") from None
        raise ModelCallFailed(
            f"gave up after {self.max_retries + 1} attempts: {last_error}"
        )
