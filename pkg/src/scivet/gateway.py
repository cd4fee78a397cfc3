"""Chat-completion plumbing: HTTP backend, retry policy, cassettes, batching.

Requests go out in the common chat-completions JSON shape (model, messages,
temperature, max_tokens) and the first choice's message content comes back.
Cassettes replay recorded responses so every pipeline can run offline.
"""
from __future__ import annotations

import hashlib
import json
import logging
import os
import re
import threading
import time
from collections.abc import Callable, Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import requests

log = logging.getLogger(__name__)

ENDPOINT_ENV = "SCIVET_ENDPOINT"
API_KEY_ENV = "SCIVET_API_KEY"

DEFAULT_MAX_TOKENS = 1024
DEFAULT_RETRIES = 3
DEFAULT_BACKOFF_BASE = 1.0
DEFAULT_BACKOFF_FACTOR = 2.0
DEFAULT_TIMEOUT = 60.0

CASSETTE_MODES = ("replay", "record", "passthrough")


class GatewayError(Exception):
    """Base class for completion failures."""


class TransientError(GatewayError):
    """Retryable condition: timeout, dropped connection, 429, or 5xx."""


class TransportError(GatewayError):
    """Transient failures persisted past the retry budget."""


class RequestError(GatewayError):
    """The backend rejected the request outright (non-retryable 4xx)."""


class CassetteError(GatewayError):
    """Replay mode found no entry, or more than one, for a request."""


def family_default_temperature(model_name: str) -> float:
    # llama endpoints reject exactly-zero temperature
    return 0.0001 if "llama" in model_name.lower() else 0.0


@dataclass(frozen=True)
class ChatRequest:
    system_message: str
    user_message: str
    temperature: float
    max_tokens: int = DEFAULT_MAX_TOKENS
    model_name: str = "gpt-4"

    def __post_init__(self) -> None:
        if not self.user_message:
            raise ValueError("user message must not be empty")
        if self.temperature < 0.0:
            raise ValueError(f"temperature must be non-negative, got {self.temperature}")
        if self.max_tokens < 1:
            raise ValueError(f"max_tokens must be positive, got {self.max_tokens}")


@dataclass(frozen=True)
class ChatResponse:
    text: str
    model_name: str
    attempts: int
    latency_ms: int
    backend_id: str


@dataclass(frozen=True)
class RequestDefaults:
    """Model/sampling settings shared by every request a pipeline builds."""
    model_name: str = "gpt-4"
    temperature: float | None = None
    max_tokens: int = DEFAULT_MAX_TOKENS

    def build(self, system_message: str, user_message: str) -> ChatRequest:
        temperature = self.temperature
        if temperature is None:
            temperature = family_default_temperature(self.model_name)
        return ChatRequest(
            system_message=system_message,
            user_message=user_message,
            temperature=temperature,
            max_tokens=self.max_tokens,
            model_name=self.model_name,
        )


def request_hash(system_message: str, user_message: str) -> str:
    payload = json.dumps([system_message, user_message],
                         ensure_ascii=False, separators=(",", ":"))
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()


class HttpBackend:
    """POSTs chat requests to an OpenAI-style completions URL."""

    def __init__(
        self,
        endpoint: str | None = None,
        api_key: str | None = None,
        timeout: float = DEFAULT_TIMEOUT,
        session: requests.Session | None = None,
    ) -> None:
        self.endpoint = endpoint or os.environ.get(ENDPOINT_ENV, "")
        if not self.endpoint:
            raise ValueError(f"no endpoint configured; pass one or set {ENDPOINT_ENV}")
        self._api_key = api_key if api_key is not None else os.environ.get(API_KEY_ENV, "")
        self._timeout = timeout
        self._session = session or requests.Session()
        self.backend_id = f"http:{self.endpoint}"

    def scrub(self, text: str) -> str:
        """Blank the API key out of any outgoing diagnostic text."""
        if self._api_key:
            text = text.replace(self._api_key, "[redacted]")
        return text

    def send(self, request: ChatRequest) -> str:
        body = {
            "model": request.model_name,
            "messages": [
                {"role": "system", "content": request.system_message},
                {"role": "user", "content": request.user_message},
            ],
            "temperature": request.temperature,
            "max_tokens": request.max_tokens,
        }
        headers = {}
        if self._api_key:
            headers["Authorization"] = f"Bearer {self._api_key}"
        try:
            response = self._session.post(
                self.endpoint, json=body, headers=headers, timeout=self._timeout,
            )
        except requests.Timeout as exc:
            raise TransientError(self.scrub(f"request timed out: {exc}")) from None
        except requests.ConnectionError as exc:
            raise TransientError(self.scrub(f"connection failed: {exc}")) from None
        if response.status_code == 429 or response.status_code >= 500:
            raise TransientError(self.scrub(
                f"HTTP {response.status_code}: {response.text[:200]}"))
        if response.status_code >= 400:
            raise RequestError(self.scrub(
                f"HTTP {response.status_code}: {response.text[:200]}"))
        try:
            data = response.json()
            return data["choices"][0]["message"]["content"]
        except (ValueError, KeyError, IndexError, TypeError) as exc:
            raise RequestError(self.scrub(f"unparseable backend response: {exc}")) from None


@dataclass
class CassetteEntry:
    response_text: str
    request_hash: str | None = None
    system: str = ""
    user: str = ""
    pattern: str | None = None


class Cassette:
    """JSONL store of recorded exchanges, matched by hash then by pattern."""

    def __init__(self, entries: Sequence[CassetteEntry] = (), path: str | Path | None = None) -> None:
        self.entries: list[CassetteEntry] = list(entries)
        self.path = Path(path) if path is not None else None
        self._lock = threading.Lock()

    @classmethod
    def load(cls, path: str | Path) -> "Cassette":
        path = Path(path)
        if not path.exists():
            raise CassetteError(f"cassette file {path} does not exist")
        entries = []
        with path.open(encoding="utf-8") as handle:
            for lineno, line in enumerate(handle, start=1):
                if not line.strip():
                    continue
                try:
                    raw = json.loads(line)
                except json.JSONDecodeError as exc:
                    raise CassetteError(f"{path}:{lineno}: invalid JSON ({exc.msg})") from None
                if "response_text" not in raw:
                    raise CassetteError(f"{path}:{lineno}: entry lacks response_text")
                entries.append(CassetteEntry(
                    response_text=raw["response_text"],
                    request_hash=raw.get("request_hash"),
                    system=raw.get("system", ""),
                    user=raw.get("user", ""),
                    pattern=raw.get("pattern"),
                ))
        return cls(entries, path)

    def save(self, path: str | Path | None = None) -> None:
        target = Path(path) if path is not None else self.path
        if target is None:
            raise ValueError("no path given and cassette has none recorded")
        target.parent.mkdir(parents=True, exist_ok=True)
        with target.open("w", encoding="utf-8") as handle:
            for entry in self.entries:
                row: dict = {"response_text": entry.response_text}
                if entry.request_hash is not None:
                    row["request_hash"] = entry.request_hash
                    row["system"] = entry.system
                    row["user"] = entry.user
                if entry.pattern is not None:
                    row["pattern"] = entry.pattern
                handle.write(json.dumps(row, ensure_ascii=False) + "\n")

    def lookup(self, request: ChatRequest) -> str:
        digest = request_hash(request.system_message, request.user_message)
        exact = [e for e in self.entries if e.request_hash == digest]
        if len(exact) == 1:
            return exact[0].response_text
        if len(exact) > 1:
            raise CassetteError(f"{len(exact)} cassette entries share hash {digest}")
        haystack = request.system_message + "\n" + request.user_message
        matched = [e for e in self.entries
                   if e.pattern is not None and re.search(e.pattern, haystack)]
        if len(matched) == 1:
            return matched[0].response_text
        if len(matched) > 1:
            raise CassetteError(f"{len(matched)} cassette patterns match request {digest}")
        raise CassetteError(f"no cassette entry for request {digest}")

    def record(self, request: ChatRequest, response_text: str) -> None:
        entry = CassetteEntry(
            response_text=response_text,
            request_hash=request_hash(request.system_message, request.user_message),
            system=request.system_message,
            user=request.user_message,
        )
        with self._lock:
            self.entries.append(entry)


class CassetteBackend:
    """Wraps a cassette in one of three modes.

    replay       -- answer from the cassette only; misses raise CassetteError
    record       -- forward to ``inner``, remember every exchange
    passthrough  -- forward to ``inner`` untouched
    """

    def __init__(self, cassette: Cassette, mode: str = "replay", inner=None) -> None:
        if mode not in CASSETTE_MODES:
            raise ValueError(f"unknown cassette mode {mode!r}; expected one of {CASSETTE_MODES}")
        if mode in ("record", "passthrough") and inner is None:
            raise ValueError(f"cassette mode {mode!r} needs an inner backend")
        self.cassette = cassette
        self.mode = mode
        self.inner = inner
        self.backend_id = f"cassette:{mode}"

    def send(self, request: ChatRequest) -> str:
        if self.mode == "replay":
            return self.cassette.lookup(request)
        text = self.inner.send(request)
        if self.mode == "record":
            self.cassette.record(request, text)
        return text


def complete(
    backend,
    request: ChatRequest,
    retries: int = DEFAULT_RETRIES,
    backoff_base: float = DEFAULT_BACKOFF_BASE,
    backoff_factor: float = DEFAULT_BACKOFF_FACTOR,
    sleep: Callable[[float], None] = time.sleep,
) -> ChatResponse:
    """Send one request, retrying transient failures with exponential backoff.

    Only timeouts, connection drops, 429s, and 5xx responses are retried;
    everything else propagates immediately.
    """
    if retries < 0:
        raise ValueError(f"retries must be non-negative, got {retries}")
    attempts = 0
    for attempt in range(retries + 1):
        attempts += 1
        started = time.monotonic()
        try:
            text = backend.send(request)
        except TransientError as exc:
            if attempt == retries:
                raise TransportError(
                    f"gave up after {attempts} attempts: {exc}") from None
            delay = backoff_base * backoff_factor ** attempt
            log.debug("attempt %d failed (%s); retrying in %.1fs", attempts, exc, delay)
            sleep(delay)
            continue
        return ChatResponse(
            text=text,
            model_name=request.model_name,
            attempts=attempts,
            latency_ms=int((time.monotonic() - started) * 1000),
            backend_id=getattr(backend, "backend_id", backend.__class__.__name__),
        )
    raise AssertionError("unreachable")


def run_batch(
    backend,
    requests_: Sequence[ChatRequest],
    parallelism: int = 4,
    retries: int = DEFAULT_RETRIES,
    backoff_base: float = DEFAULT_BACKOFF_BASE,
    backoff_factor: float = DEFAULT_BACKOFF_FACTOR,
    sleep: Callable[[float], None] = time.sleep,
) -> list[ChatResponse | GatewayError]:
    """Complete many requests with bounded concurrency, preserving order.

    A failed slot holds its GatewayError instead of aborting the batch.
    """
    if parallelism < 1:
        raise ValueError(f"parallelism must be at least 1, got {parallelism}")
    if not requests_:
        return []

    def one(request: ChatRequest) -> ChatResponse | GatewayError:
        try:
            return complete(backend, request, retries=retries,
                            backoff_base=backoff_base,
                            backoff_factor=backoff_factor, sleep=sleep)
        except GatewayError as exc:
            return exc

    with ThreadPoolExecutor(max_workers=parallelism) as pool:
        futures = [pool.submit(one, request) for request in requests_]
        return [f.result() for f in futures]
