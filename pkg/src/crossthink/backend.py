"""Streaming client over chat-completion-compatible inference endpoints.

All backends expose the same surface: ``generate_stream(request)`` returns a
:class:`TokenStream` that yields :class:`StreamEvent`s in token order and
exposes a :class:`BackendUsage` once exhausted. Transport errors are retried
with exponential backoff and de-duplicated by token index, so a consumer never
sees the same token twice; protocol errors are never retried.
"""

from __future__ import annotations

import json
import os
import time
from dataclasses import dataclass, field
from typing import Callable, Iterator

import httpx

from .errors import (
    ConfigurationError,
    GenerationTimeout,
    ProtocolError,
    TransportError,
)

VALID_ROLES = ("system", "user", "assistant")


@dataclass(frozen=True)
class Message:
    role: str
    content: str


@dataclass(frozen=True)
class InferenceRequest:
    """One chat-completion call. Greedy decoding (temperature 0) by default."""

    model_id: str
    messages: tuple[Message, ...]
    max_new_tokens: int = 4096
    temperature: float = 0.0
    stop_sequences: tuple[str, ...] = ()
    request_id: str = ""

    def validate(self) -> None:
        if not self.messages:
            raise ConfigurationError("request has no messages")
        for m in self.messages:
            if m.role not in VALID_ROLES:
                raise ConfigurationError(f"unknown message role {m.role!r}")
        system_positions = [i for i, m in enumerate(self.messages) if m.role == "system"]
        if len(system_positions) > 1:
            raise ConfigurationError("more than one system message")
        if system_positions and system_positions[0] != 0:
            raise ConfigurationError("system message must come first")
        if self.max_new_tokens <= 0:
            raise ConfigurationError("max_new_tokens must be positive")

    @property
    def ends_with_assistant(self) -> bool:
        return bool(self.messages) and self.messages[-1].role == "assistant"

    def with_messages(self, messages: tuple[Message, ...]) -> "InferenceRequest":
        return InferenceRequest(
            model_id=self.model_id,
            messages=messages,
            max_new_tokens=self.max_new_tokens,
            temperature=self.temperature,
            stop_sequences=self.stop_sequences,
            request_id=self.request_id,
        )


@dataclass(frozen=True)
class StreamEvent:
    token_text: str
    token_index: int
    finish: str | None = None  # "stop" | "length" | "backend_error"


@dataclass
class BackendUsage:
    prompt_tokens: int = 0
    completion_tokens: int = 0
    wall_ms: float = 0.0

    def add(self, other: "BackendUsage") -> None:
        self.prompt_tokens += other.prompt_tokens
        self.completion_tokens += other.completion_tokens
        self.wall_ms += other.wall_ms


@dataclass(frozen=True)
class EndpointConfig:
    """HTTP chat-completion endpoint. The bearer token is read from the
    environment variable named in ``api_key_env`` at request time."""

    base_url: str
    model_id: str = ""
    api_key_env: str = "CROSSTHINK_API_KEY"
    chat_path: str = "/chat/completions"
    timeout_s: float = 120.0
    max_retries: int = 3
    backoff_base_s: float = 0.5
    supports_assistant_continuation: bool = True


class TokenStream:
    """Iterator over StreamEvents with usage accounting and retry handling.

    ``make_attempt`` opens a fresh raw event iterator; on TransportError the
    stream is reopened (up to ``max_retries`` attempts total) and events whose
    index was already delivered are skipped, keeping the consumer-visible
    stream duplicate-free.
    """

    def __init__(
        self,
        make_attempt: Callable[[], Iterator[StreamEvent]],
        prompt_tokens: int,
        max_retries: int = 3,
        backoff_base_s: float = 0.5,
    ):
        self._make_attempt = make_attempt
        self._max_retries = max(1, max_retries)
        self._backoff_base_s = backoff_base_s
        self._next_index = 0
        self._finished = False
        self._start = time.monotonic()
        self.usage = BackendUsage(prompt_tokens=prompt_tokens)

    def __iter__(self) -> Iterator[StreamEvent]:
        attempt = 0
        while True:
            attempt += 1
            try:
                for event in self._make_attempt():
                    if event.token_index < self._next_index:
                        continue  # replayed after a retry
                    if event.token_index != self._next_index:
                        raise ProtocolError(
                            f"token index jumped to {event.token_index}, "
                            f"expected {self._next_index}"
                        )
                    self._next_index += 1
                    self.usage.completion_tokens += 1
                    if event.finish is not None:
                        self._finished = True
                    yield event
                    if self._finished:
                        self._settle()
                        return
                # Raw iterator ended without a finish event.
                raise ProtocolError("stream ended without a finish event")
            except TransportError as exc:
                if attempt >= self._max_retries:
                    self._settle()
                    raise TransportError(str(exc), partial_count=self._next_index) from exc
                time.sleep(self._backoff_base_s * (2 ** (attempt - 1)))

    def _settle(self) -> None:
        self.usage.wall_ms = (time.monotonic() - self._start) * 1000.0


class Backend:
    """Interface both the HTTP gateway and the scripted mock implement."""

    supports_assistant_continuation: bool = True

    def generate_stream(self, request: InferenceRequest) -> TokenStream:
        raise NotImplementedError


def approx_prompt_tokens(request: InferenceRequest) -> int:
    """Whitespace-token estimate; real backends report their own count."""
    return sum(len(m.content.split()) for m in request.messages)


class HttpBackend(Backend):
    """Gateway over an OpenAI-style chat-completion endpoint with SSE streaming."""

    def __init__(self, endpoint: EndpointConfig):
        self.endpoint = endpoint
        self.supports_assistant_continuation = endpoint.supports_assistant_continuation

    def _headers(self) -> dict[str, str]:
        headers = {"Content-Type": "application/json"}
        token = os.environ.get(self.endpoint.api_key_env, "")
        if token:
            headers["Authorization"] = f"Bearer {token}"
        return headers

    def _payload(self, request: InferenceRequest) -> dict:
        payload: dict = {
            "model": request.model_id or self.endpoint.model_id,
            "messages": [{"role": m.role, "content": m.content} for m in request.messages],
            "max_tokens": request.max_new_tokens,
            "temperature": request.temperature,
            "stream": True,
            "stream_options": {"include_usage": True},
        }
        if request.stop_sequences:
            payload["stop"] = list(request.stop_sequences)
        if request.ends_with_assistant:
            if not self.endpoint.supports_assistant_continuation:
                raise ConfigurationError(
                    "request seeds an assistant turn but the endpoint is not "
                    "configured for assistant continuation"
                )
            payload["continue_final_message"] = True
            payload["add_generation_prompt"] = False
        return payload

    def generate_stream(self, request: InferenceRequest) -> TokenStream:
        request.validate()
        payload = self._payload(request)
        url = self.endpoint.base_url.rstrip("/") + self.endpoint.chat_path
        headers = self._headers()
        timeout = self.endpoint.timeout_s

        def attempt() -> Iterator[StreamEvent]:
            index = 0
            try:
                with httpx.Client(timeout=timeout) as client:
                    with client.stream("POST", url, json=payload, headers=headers) as resp:
                        if resp.status_code >= 500:
                            raise TransportError(f"backend returned {resp.status_code}")
                        if resp.status_code >= 400:
                            body = resp.read().decode("utf-8", "replace")[:500]
                            raise ProtocolError(f"backend returned {resp.status_code}: {body}")
                        finished = False
                        for line in resp.iter_lines():
                            if not line or not line.startswith("data:"):
                                continue
                            data = line[len("data:"):].strip()
                            if data == "[DONE]":
                                break
                            chunk = _parse_chunk(data)
                            for text, finish in _chunk_deltas(chunk):
                                yield StreamEvent(text, index, finish)
                                index += 1
                                if finish is not None:
                                    finished = True
                            if finished:
                                return
                        if not finished:
                            raise TransportError("stream closed before finish_reason")
            except httpx.TimeoutException as exc:
                raise GenerationTimeout(str(exc), partial_count=index) from exc
            except httpx.HTTPError as exc:
                raise TransportError(str(exc)) from exc

        return TokenStream(
            attempt,
            prompt_tokens=approx_prompt_tokens(request),
            max_retries=self.endpoint.max_retries,
            backoff_base_s=self.endpoint.backoff_base_s,
        )


def _parse_chunk(data: str) -> dict:
    try:
        chunk = json.loads(data)
    except json.JSONDecodeError as exc:
        raise ProtocolError(f"malformed stream chunk: {data[:200]}") from exc
    if not isinstance(chunk, dict):
        raise ProtocolError("stream chunk is not an object")
    return chunk


def _chunk_deltas(chunk: dict) -> list[tuple[str, str | None]]:
    """Extract (token_text, finish) pairs from one SSE chunk."""
    out: list[tuple[str, str | None]] = []
    for choice in chunk.get("choices", []):
        delta = choice.get("delta", {})
        text = delta.get("content") or ""
        finish = choice.get("finish_reason")
        if finish is not None and finish not in ("stop", "length"):
            finish = "backend_error"
        if text or finish is not None:
            out.append((text, finish))
    return out


def generate_stream(request: InferenceRequest, endpoint: EndpointConfig) -> TokenStream:
    """Convenience wrapper: one-shot stream against an HTTP endpoint."""
    return HttpBackend(endpoint).generate_stream(request)
