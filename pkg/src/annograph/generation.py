"""Clients for the pluggable text-generation endpoint.

The service talks to whatever chat-completion-style endpoint it is pointed
at; a deterministic mock keyed on canned replies stands in for it during
tests and offline runs.
"""

from __future__ import annotations

import hashlib
import json
import logging
import os
import time
from pathlib import Path
from typing import Optional, Protocol, Union

import httpx

logger = logging.getLogger(__name__)

History = list[tuple[str, str]]  # (user prompt, assistant reply) turns


class GenerationUnavailableError(RuntimeError):
    """The generation endpoint could not produce a reply within the retry budget."""


class GenerationClient(Protocol):
    def generate(self, prompt: str, history: History, meta: Optional[dict] = None) -> str:
        ...


def prompt_key(prompt: str) -> str:
    """Stable fixture key for a prompt."""
    return hashlib.sha256(prompt.encode("utf-8")).hexdigest()


class MockGenerationClient:
    """Replays canned replies from a fixture mapping.

    Lookup order: exact prompt hash (``by_prompt``), then ``task/stage/type``,
    then ``task/stage`` (``by_key``), then the default reply.  With no match
    and no default the call fails like an unreachable endpoint, which keeps
    fixture gaps loud.

    Fixture file format (JSON)::

        {
          "by_prompt": {"<sha256 of full prompt>": "reply"},
          "by_key": {"NER/1": "reply", "NER/2/PER": "reply"}
        }
    """

    def __init__(
        self,
        fixtures: Union[dict, str, Path, None] = None,
        default_reply: Optional[str] = None,
    ):
        if isinstance(fixtures, (str, Path)):
            fixtures = json.loads(Path(fixtures).read_text(encoding="utf-8"))
        fixtures = fixtures or {}
        self.by_prompt: dict[str, str] = dict(fixtures.get("by_prompt", {}))
        self.by_key: dict[str, str] = dict(fixtures.get("by_key", {}))
        self.default_reply = default_reply
        self.calls: list[str] = []

    def add_reply(self, prompt: str, reply: str) -> None:
        self.by_prompt[prompt_key(prompt)] = reply

    def generate(self, prompt: str, history: History, meta: Optional[dict] = None) -> str:
        self.calls.append(prompt)
        reply = self.by_prompt.get(prompt_key(prompt))
        if reply is not None:
            return reply
        if meta:
            parts = [str(meta.get("task", "")), str(meta.get("stage", ""))]
            if meta.get("type"):
                keyed = self.by_key.get("/".join(parts + [str(meta["type"])]))
                if keyed is not None:
                    return keyed
            keyed = self.by_key.get("/".join(parts))
            if keyed is not None:
                return keyed
        if self.default_reply is not None:
            return self.default_reply
        raise GenerationUnavailableError(
            f"no canned reply for prompt hash {prompt_key(prompt)[:12]}… (meta={meta})"
        )


class HttpGenerationClient:
    """JSON-over-HTTP client for a chat-style generation endpoint.

    Request:  ``{"messages": [{"role": "user"|"assistant", "content": str}]}``
    Response: ``{"content": str}``

    The bearer token is read from the environment at call time so rotating
    it needs no restart.
    """

    def __init__(
        self,
        endpoint: str,
        token_env: str = "ANNOGRAPH_GENERATION_TOKEN",
        timeout: float = 30.0,
        retries: int = 2,
        backoff: float = 0.5,
        transport: Optional[httpx.BaseTransport] = None,
    ):
        self.endpoint = endpoint
        self.token_env = token_env
        self.timeout = timeout
        self.retries = retries
        self.backoff = backoff
        self._client = httpx.Client(transport=transport, timeout=timeout)

    def _headers(self) -> dict:
        headers = {"Content-Type": "application/json"}
        token = os.environ.get(self.token_env)
        if token:
            headers["Authorization"] = f"Bearer {token}"
        return headers

    def generate(self, prompt: str, history: History, meta: Optional[dict] = None) -> str:
        messages = []
        for user, assistant in history:
            messages.append({"role": "user", "content": user})
            messages.append({"role": "assistant", "content": assistant})
        messages.append({"role": "user", "content": prompt})

        last_error: Optional[Exception] = None
        for attempt in range(self.retries + 1):
            try:
                response = self._client.post(
                    self.endpoint,
                    json={"messages": messages},
                    headers=self._headers(),
                )
                if response.status_code >= 500:
                    raise httpx.HTTPStatusError(
                        f"server error {response.status_code}",
                        request=response.request,
                        response=response,
                    )
                response.raise_for_status()
                payload = response.json()
                content = payload.get("content")
                if not isinstance(content, str):
                    raise ValueError(f"endpoint reply missing 'content': {payload!r}")
                return content
            except (httpx.HTTPError, ValueError) as error:
                last_error = error
                logger.warning("generation attempt %d/%d failed: %s",
                               attempt + 1, self.retries + 1, error)
                if attempt < self.retries and self.backoff:
                    time.sleep(self.backoff * (attempt + 1))
        raise GenerationUnavailableError(str(last_error))
