"""Deterministic scripted backend for tests and dry runs.

A script is a list of entries, each matching a request pattern and describing
the token stream the "model" produces. Identical requests always produce
identical event streams; fault injection (mid-stream disconnects) is the only
stateful behavior and is keyed per request so reruns stay reproducible.

Script file schema (YAML list; see README):
    - match: substring matched against the user messages ("*" = any)
      tokens: [list of token strings]
      delimiter_index: int or null   # where the end-of-thinking delimiter
                                     # appears in the emitted stream
      continuation: [tokens emitted when thinking is continued]
      answer: [tokens for trigger-elicited answers when delimiter_index null]
      disconnect_after: int or null  # fault: drop the stream after N tokens
      fail_attempts: int or null     # how many attempts fail (null = all)
"""

from __future__ import annotations

import hashlib
import threading
from dataclasses import dataclass
from pathlib import Path
from typing import Iterator, Sequence

import yaml

from .backend import (
    Backend,
    InferenceRequest,
    StreamEvent,
    TokenStream,
    approx_prompt_tokens,
)
from .errors import ConfigurationError, ScriptMissError, TransportError


@dataclass(frozen=True)
class ScriptEntry:
    tokens: tuple[str, ...]
    match: str = "*"
    delimiter_index: int | None = None
    continuation: tuple[str, ...] = ()
    answer: tuple[str, ...] = ()
    disconnect_after: int | None = None
    fail_attempts: int | None = None

    def __post_init__(self) -> None:
        if self.delimiter_index is not None and not (
            0 <= self.delimiter_index <= len(self.tokens)
        ):
            raise ConfigurationError(
                f"delimiter_index {self.delimiter_index} outside token list "
                f"of length {len(self.tokens)}"
            )

    @property
    def thinking(self) -> tuple[str, ...]:
        if self.delimiter_index is None:
            return self.tokens
        return self.tokens[: self.delimiter_index]

    @property
    def answer_tokens(self) -> tuple[str, ...]:
        if self.delimiter_index is None:
            return self.answer
        return self.tokens[self.delimiter_index:]


def load_script(path: str | Path) -> list[ScriptEntry]:
    raw = yaml.safe_load(Path(path).read_text(encoding="utf-8"))
    if not isinstance(raw, list):
        raise ConfigurationError(f"script file {path} must hold a list of entries")
    entries = []
    for i, item in enumerate(raw):
        if not isinstance(item, dict) or "tokens" not in item:
            raise ConfigurationError(f"script entry {i} malformed (needs 'tokens')")
        entries.append(
            ScriptEntry(
                tokens=tuple(item["tokens"]),
                match=item.get("match", "*"),
                delimiter_index=item.get("delimiter_index"),
                continuation=tuple(item.get("continuation", ())),
                answer=tuple(item.get("answer", ())),
                disconnect_after=item.get("disconnect_after"),
                fail_attempts=item.get("fail_attempts"),
            )
        )
    return entries


class MockBackend(Backend):
    """Replays scripted token streams for matching requests."""

    supports_assistant_continuation = True

    def __init__(
        self, entries: Sequence[ScriptEntry], delimiter: str, max_retries: int = 3
    ):
        if not delimiter:
            raise ConfigurationError("mock backend needs a non-empty delimiter")
        self.entries = list(entries)
        self.delimiter = delimiter
        self.max_retries = max_retries
        self.calls = 0
        self._attempts: dict[str, int] = {}
        self._lock = threading.Lock()

    @classmethod
    def from_file(cls, path: str | Path, delimiter: str) -> "MockBackend":
        return cls(load_script(path), delimiter)

    def _find_entry(self, request: InferenceRequest) -> ScriptEntry:
        user_text = "\n".join(m.content for m in request.messages if m.role == "user")
        for entry in self.entries:
            if entry.match == "*" or entry.match in user_text:
                return entry
        raise ScriptMissError(f"no script entry matches request: {user_text[:120]!r}")

    def _sequence(self, entry: ScriptEntry, request: InferenceRequest) -> tuple[str, ...]:
        if not request.ends_with_assistant:
            return self._full_stream(entry)
        content = request.messages[-1].content
        if self.delimiter in content:
            # Thinking was closed by the controller: produce the answer.
            return entry.answer_tokens
        thinking_text = "".join(entry.thinking)
        if thinking_text and thinking_text in content:
            # Thinking already replayed (a continuation round, e.g. after a
            # wait injection): produce the continuation then close again.
            seq = entry.continuation
            if entry.delimiter_index is not None:
                seq = seq + (self.delimiter,) + entry.answer_tokens
            return seq
        # Seeded assistant turn (e.g. a forced prefix): start the main stream.
        return self._full_stream(entry)

    def _full_stream(self, entry: ScriptEntry) -> tuple[str, ...]:
        if entry.delimiter_index is None:
            return entry.tokens
        return entry.thinking + (self.delimiter,) + entry.answer_tokens

    def _request_key(self, request: InferenceRequest) -> str:
        h = hashlib.sha256()
        for m in request.messages:
            h.update(m.role.encode())
            h.update(b"\x00")
            h.update(m.content.encode())
            h.update(b"\x01")
        h.update(str(request.max_new_tokens).encode())
        return h.hexdigest()

    def generate_stream(self, request: InferenceRequest) -> TokenStream:
        request.validate()
        entry = self._find_entry(request)
        seq = self._sequence(entry, request)
        finish = "stop"
        if len(seq) > request.max_new_tokens:
            seq = seq[: request.max_new_tokens]
            finish = "length"
        key = self._request_key(request)
        with self._lock:
            self.calls += 1

        def attempt() -> Iterator[StreamEvent]:
            with self._lock:
                attempt_no = self._attempts.get(key, 0) + 1
                self._attempts[key] = attempt_no
            faulty = entry.disconnect_after is not None and (
                entry.fail_attempts is None or attempt_no <= entry.fail_attempts
            )
            if not seq:
                yield StreamEvent("", 0, finish)
                return
            for i, tok in enumerate(seq):
                if faulty and i >= entry.disconnect_after:
                    raise TransportError(
                        f"scripted disconnect after {entry.disconnect_after} tokens"
                    )
                yield StreamEvent(tok, i, finish if i == len(seq) - 1 else None)

        return TokenStream(
            attempt,
            prompt_tokens=approx_prompt_tokens(request),
            max_retries=self.max_retries,
            backoff_base_s=0.0,
        )


def mock_backend(
    script: Sequence[ScriptEntry] | str | Path, delimiter: str
) -> MockBackend:
    """Build a mock endpoint handle from entries or a script file path."""
    if isinstance(script, (str, Path)):
        return MockBackend.from_file(script, delimiter)
    return MockBackend(script, delimiter)
