"""Chat-completion gateway: deterministic mocks and a remote HTTP client.

All pipeline stages speak to one Gateway interface so the whole system
runs offline against scripted or rule-based mocks. The remote client
talks the common chat-completions wire format and enforces a global
in-flight cap plus optional request pacing.
"""

from __future__ import annotations

import json
import os
import random
import re
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Protocol

import requests

from .errors import AuthError, LlmUnavailable, MockExhausted, ResponseMalformed

API_KEY_ENV = "CHATCADP_LLM_KEY"

_ROLES = ("system", "user", "assistant")


@dataclass(frozen=True)
class ChatMessage:
    role: str
    content: str

    def __post_init__(self):
        if self.role not in _ROLES:
            raise ValueError(f"unknown role {self.role!r}")
        if self.role in ("system", "user") and not self.content:
            raise ValueError(f"{self.role} message must have content")


@dataclass(frozen=True)
class CompletionRequest:
    messages: tuple[ChatMessage, ...]
    temperature: float = 0.0
    max_tokens: int = 512
    tag: str = ""

    def __post_init__(self):
        object.__setattr__(self, "messages", tuple(self.messages))
        if not any(m.role == "user" for m in self.messages):
            raise ValueError("request needs at least one user message")
        if self.temperature < 0:
            raise ValueError("temperature must be >= 0")
        if self.max_tokens <= 0:
            raise ValueError("max_tokens must be positive")

    @property
    def prompt_text(self) -> str:
        return "\n".join(m.content for m in self.messages)


def user_request(content: str, system: str | None = None, tag: str = "") -> CompletionRequest:
    messages = []
    if system:
        messages.append(ChatMessage("system", system))
    messages.append(ChatMessage("user", content))
    return CompletionRequest(messages=tuple(messages), tag=tag)


@dataclass(frozen=True)
class GatewayPolicy:
    max_retries: int = 3
    backoff_base: float = 0.5  # seconds
    timeout: float = 30.0  # seconds
    max_in_flight: int = 4
    requests_per_minute: int | None = None

    def __post_init__(self):
        for name in ("max_retries", "backoff_base", "timeout", "max_in_flight"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if self.requests_per_minute is not None and self.requests_per_minute <= 0:
            raise ValueError("requests_per_minute must be positive")


class Gateway(Protocol):
    def complete(self, request: CompletionRequest) -> str: ...


class ScriptedGateway:
    """Replays a fixed reply queue; output depends only on call order."""

    def __init__(self, replies: list[str]):
        self._replies = list(replies)
        self._lock = threading.Lock()
        self.requests: list[CompletionRequest] = []

    def complete(self, request: CompletionRequest) -> str:
        with self._lock:
            self.requests.append(request)
            if not self._replies:
                raise MockExhausted(f"no scripted reply left for call {len(self.requests)}")
            return self._replies.pop(0)


class RuleGateway:
    """Maps prompt content to replies via ordered regex rules.

    A rule's reply may be a string or a callable taking the request, so
    tests can synthesize replies from the prompt itself.
    """

    def __init__(self, rules: list[tuple[str, object]], default: str | None = None):
        self._rules = [(re.compile(pat), reply) for pat, reply in rules]
        self._default = default
        self._lock = threading.Lock()
        self.requests: list[CompletionRequest] = []

    def complete(self, request: CompletionRequest) -> str:
        with self._lock:
            self.requests.append(request)
        text = request.prompt_text
        for pattern, reply in self._rules:
            if pattern.search(text):
                return reply(request) if callable(reply) else reply
        if self._default is not None:
            return self._default
        raise MockExhausted("no rule matched the prompt")


class RemoteGateway:
    """Chat-completions client with retry, backoff, and an in-flight cap.

    Retries transport errors and 429/5xx responses with full-jitter
    exponential backoff; 401/403 fail immediately. Bearer token comes
    from the CHATCADP_LLM_KEY environment variable when present.
    """

    def __init__(
        self,
        base_url: str,
        model: str,
        policy: GatewayPolicy | None = None,
        *,
        api_key_env: str = API_KEY_ENV,
        sleep: Callable[[float], None] = time.sleep,
        rng: random.Random | None = None,
        clock: Callable[[], float] = time.monotonic,
    ):
        self.base_url = base_url.rstrip("/")
        self.model = model
        self.policy = policy or GatewayPolicy()
        self._api_key_env = api_key_env
        self._sleep = sleep
        self._rng = rng or random.Random()
        self._clock = clock
        self._slots = threading.Semaphore(self.policy.max_in_flight)
        self._pace_lock = threading.Lock()
        self._next_start = 0.0
        self.stats = {"calls": 0, "retries": 0, "failures": 0}

    def _headers(self) -> dict[str, str]:
        headers = {"Content-Type": "application/json"}
        key = os.environ.get(self._api_key_env)
        if key:
            headers["Authorization"] = f"Bearer {key}"
        return headers

    def _pace(self):
        if self.policy.requests_per_minute is None:
            return
        interval = 60.0 / self.policy.requests_per_minute
        with self._pace_lock:
            now = self._clock()
            wait = self._next_start - now
            self._next_start = max(now, self._next_start) + interval
        if wait > 0:
            self._sleep(wait)

    def complete(self, request: CompletionRequest) -> str:
        body = {
            "model": self.model,
            "messages": [{"role": m.role, "content": m.content} for m in request.messages],
            "temperature": request.temperature,
            "max_tokens": request.max_tokens,
        }
        with self._slots:
            self.stats["calls"] += 1
            last_error: Exception | None = None
            for attempt in range(self.policy.max_retries + 1):
                if attempt > 0:
                    self.stats["retries"] += 1
                    self._sleep(self._rng.uniform(0, self.policy.backoff_base * 2**attempt))
                self._pace()
                try:
                    resp = requests.post(
                        f"{self.base_url}/chat/completions",
                        json=body,
                        headers=self._headers(),
                        timeout=self.policy.timeout,
                    )
                except requests.RequestException as exc:
                    last_error = exc
                    continue
                if resp.status_code in (401, 403):
                    self.stats["failures"] += 1
                    raise AuthError(f"backend rejected credentials ({resp.status_code})")
                if resp.status_code == 429 or resp.status_code >= 500:
                    last_error = LlmUnavailable(f"backend status {resp.status_code}")
                    continue
                try:
                    resp.raise_for_status()
                    content = resp.json()["choices"][0]["message"]["content"]
                except (requests.RequestException, KeyError, IndexError, TypeError, ValueError) as exc:
                    self.stats["failures"] += 1
                    raise ResponseMalformed(f"bad completion payload: {exc}") from exc
                if not isinstance(content, str):
                    self.stats["failures"] += 1
                    raise ResponseMalformed("completion content is not a string")
                return content
            self.stats["failures"] += 1
            raise LlmUnavailable(
                f"gave up after {self.policy.max_retries + 1} attempts: {last_error}"
            )


class TranscriptGateway:
    """Wraps a gateway, appending one JSONL row per call (success or not)."""

    def __init__(self, inner: Gateway, path: str | Path, clock: Callable[[], float] = time.monotonic):
        self.inner = inner
        self.path = Path(path)
        self._clock = clock
        self._lock = threading.Lock()

    def complete(self, request: CompletionRequest) -> str:
        started = self._clock()
        row = {
            "tag": request.tag,
            "messages": [{"role": m.role, "content": m.content} for m in request.messages],
        }
        try:
            reply = self.inner.complete(request)
        except Exception as exc:
            row["error"] = f"{type(exc).__name__}: {exc}"
            row["latency"] = self._clock() - started
            self._append(row)
            raise
        row["response"] = reply
        row["latency"] = self._clock() - started
        self._append(row)
        return reply

    def _append(self, row: dict):
        with self._lock:
            with self.path.open("a", encoding="utf-8") as fh:
                fh.write(json.dumps(row, sort_keys=True) + "\n")


def with_transcript(gateway: Gateway, path: str | Path) -> TranscriptGateway:
    return TranscriptGateway(gateway, path)
