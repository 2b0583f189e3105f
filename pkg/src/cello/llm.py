"""Chat-completion transport: wire types, HTTP client with retry/backoff,
and a scripted double for deterministic tests."""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Protocol, Sequence

import requests

from .errors import ProtocolError, TransportError


@dataclass(frozen=True)
class LlmRequest:
    model: str
    messages: tuple[dict[str, str], ...]
    temperature: float = 0.2
    max_tokens: int = 1024

    def to_payload(self) -> dict[str, Any]:
        return {
            "model": self.model,
            "messages": [dict(m) for m in self.messages],
            "temperature": self.temperature,
            "max_tokens": self.max_tokens,
        }


@dataclass(frozen=True)
class LlmResponse:
    content: str
    finish_reason: str = "stop"
    token_usage: dict[str, int] = field(default_factory=dict)


class LlmClient(Protocol):
    def complete(self, request: LlmRequest) -> LlmResponse: ...


class ScriptedLlm:
    """Test double: replies from a list (or a function of the request).

    Records every request it sees so tests can assert on prompt contents.
    """

    def __init__(self, replies: Sequence[str] | Callable[[LlmRequest], str] = ("ok",)):
        self._replies = replies
        self._cursor = 0
        self.requests: list[LlmRequest] = []

    def complete(self, request: LlmRequest) -> LlmResponse:
        self.requests.append(request)
        if callable(self._replies):
            content = self._replies(request)
        else:
            content = self._replies[min(self._cursor, len(self._replies) - 1)]
            self._cursor += 1
        return LlmResponse(content=content, finish_reason="stop",
                           token_usage={"prompt_tokens": 0, "completion_tokens": 0})


class HttpLlmClient:
    """POST {model, messages, temperature, max_tokens} to a local endpoint.

    Timeouts and 5xx responses are retried with exponential backoff; other
    failures are protocol errors. Every request/response (or error) pair is
    appended to the JSON-lines audit file when one is configured.
    """

    def __init__(self, endpoint: str, retries: int = 3, backoff: float = 0.5,
                 timeout: float = 120.0, audit_path: str | Path | None = None,
                 post: Callable[..., "requests.Response"] | None = None,
                 sleep: Callable[[float], None] = time.sleep):
        self.endpoint = endpoint
        self.retries = retries
        self.backoff = backoff
        self.timeout = timeout
        self.audit_path = Path(audit_path) if audit_path else None
        self._post = post or requests.post
        self._sleep = sleep

    def complete(self, request: LlmRequest) -> LlmResponse:
        payload = request.to_payload()
        last_error: Exception | None = None
        for attempt in range(self.retries + 1):
            try:
                http = self._post(self.endpoint, json=payload, timeout=self.timeout)
            except requests.RequestException as exc:
                last_error = exc
                self._sleep(self.backoff * (2 ** attempt))
                continue
            if http.status_code >= 500:
                last_error = TransportError(f"HTTP {http.status_code}")
                self._sleep(self.backoff * (2 ** attempt))
                continue
            if http.status_code != 200:
                error = ProtocolError(f"endpoint returned HTTP {http.status_code}")
                self._audit(payload, error=str(error))
                raise error
            try:
                response = self._parse(http.json())
            except (ValueError, KeyError, IndexError, TypeError) as exc:
                error = ProtocolError(f"malformed completion response: {exc}")
                self._audit(payload, error=str(error))
                raise error from exc
            self._audit(payload, response=response)
            return response
        error = TransportError(
            f"endpoint failed after {self.retries + 1} attempts: {last_error}")
        self._audit(payload, error=str(error))
        raise error

    @staticmethod
    def _parse(doc: dict[str, Any]) -> LlmResponse:
        choice = doc["choices"][0]
        return LlmResponse(
            content=choice["message"]["content"],
            finish_reason=choice.get("finish_reason", "stop"),
            token_usage=dict(doc.get("usage", {})),
        )

    def _audit(self, payload: dict[str, Any],
               response: LlmResponse | None = None, error: str | None = None) -> None:
        if self.audit_path is None:
            return
        entry: dict[str, Any] = {"request": payload}
        if response is not None:
            entry["response"] = {"content": response.content,
                                 "finish_reason": response.finish_reason,
                                 "token_usage": response.token_usage}
        if error is not None:
            entry["error"] = error
        with self.audit_path.open("a", encoding="utf-8") as handle:
            handle.write(json.dumps(entry, sort_keys=True) + "\n")
