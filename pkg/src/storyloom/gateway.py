"""Chat-completion access: templates, transports, retry, record/replay.

The gateway speaks the OpenAI-compatible chat-completions HTTP contract
against a configurable base URL.  Three transports exist:

- live: one network round trip with bounded retry.
- record: live, plus every (fingerprint, request, response) appended to a
  line-delimited fixture file.
- replay: responses served from the fixture file by request fingerprint,
  no network at all.

Replay keeps every downstream pipeline bit-deterministic, which is how the
test suite runs the full composition flow offline.
"""

from __future__ import annotations

import hashlib
import json
import os
import re
import string
import threading
import time
from collections import deque
from dataclasses import dataclass, field
from importlib import resources
from typing import Callable, Optional

import httpx

from .errors import (
    FixtureMissError,
    MissingSlotError,
    ProviderError,
    RetriesExhaustedError,
    ValidationFailure,
)

DEFAULT_BASE_URL = "https://api.openai.com/v1"
ENV_API_KEY = "STORYLOOM_API_KEY"
ENV_API_KEY_FALLBACK = "OPENAI_API_KEY"
ENV_BASE_URL = "STORYLOOM_BASE_URL"
ENV_TRANSPORT = "STORYLOOM_TRANSPORT"
ENV_FIXTURES = "STORYLOOM_FIXTURES"

MAX_ATTEMPTS = 3
BACKOFF_START = 1.0

ROLES = ("system", "user", "assistant")

# creative drafting vs. structure-oriented extraction
TEMP_CREATIVE = 0.8
TEMP_STRUCTURED = 0.0


@dataclass(frozen=True)
class ChatMessage:
    role: str
    content: str

    def __post_init__(self) -> None:
        if self.role not in ROLES:
            raise ValidationFailure(f"unknown chat role: {self.role!r}")
        if not self.content:
            raise ValidationFailure("chat message content must be non-empty")


@dataclass(frozen=True)
class ChatTranscript:
    model: str
    temperature: float
    messages: tuple[ChatMessage, ...]

    def __post_init__(self) -> None:
        if not 0.0 <= self.temperature <= 2.0:
            raise ValidationFailure(
                f"temperature must be within [0, 2], got {self.temperature}"
            )

    def ready_for_completion(self) -> None:
        if not self.messages:
            raise ValidationFailure("transcript has no messages")
        if self.messages[-1].role != "user":
            raise ValidationFailure(
                "transcript must end with a user message to request completion"
            )


def fingerprint(transcript: ChatTranscript) -> str:
    """Stable hex token over the canonical request serialization.

    Line endings are normalized so recordings survive platform round trips;
    everything else hashes exactly as sent.
    """
    canonical = json.dumps(
        {
            "model": transcript.model,
            "temperature": transcript.temperature,
            "messages": [
                {
                    "role": m.role,
                    "content": m.content.replace("\r\n", "\n").replace("\r", "\n"),
                }
                for m in transcript.messages
            ],
        },
        sort_keys=True,
        separators=(",", ":"),
        ensure_ascii=False,
    )
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def request_payload(transcript: ChatTranscript) -> dict:
    return {
        "model": transcript.model,
        "temperature": transcript.temperature,
        "messages": [
            {"role": m.role, "content": m.content} for m in transcript.messages
        ],
    }


# --- prompt templates ---

_PLACEHOLDER = re.compile(r"\$(?:\{([A-Za-z_][A-Za-z0-9_]*)\}|([A-Za-z_][A-Za-z0-9_]*))")


def _placeholders(body: str) -> set[str]:
    names = set()
    for brace, bare in _PLACEHOLDER.findall(body.replace("$$", "")):
        names.add(brace or bare)
    return names


@dataclass(frozen=True)
class PromptTemplate:
    """A named prompt body with $slot placeholders.

    The slot list and the placeholders in the body must coincide exactly, so
    a template cannot silently drift from its call sites.
    """

    id: str
    slots: tuple[str, ...]
    body: str

    def __post_init__(self) -> None:
        found = _placeholders(self.body)
        declared = set(self.slots)
        if found != declared:
            missing = sorted(declared - found)
            extra = sorted(found - declared)
            raise ValidationFailure(
                f"template {self.id!r} slot mismatch:"
                f" undeclared placeholders {extra}, unused slots {missing}"
            )


def render(template: PromptTemplate, bindings: dict[str, str]) -> str:
    """Substitute slot values into the template body; nothing else."""
    missing = [slot for slot in template.slots if slot not in bindings]
    if missing:
        raise MissingSlotError(
            f"template {template.id!r} missing bindings: {', '.join(missing)}",
            details={"template": template.id, "missing": missing},
        )
    return string.Template(template.body).substitute(
        {slot: bindings[slot] for slot in template.slots}
    )


# --- transports ---

class Transport:
    """Interface: complete a transcript, say whether completion hits a network."""

    live = False

    def complete(self, transcript: ChatTranscript) -> str:
        raise NotImplementedError


class LiveTransport(Transport):
    """HTTP chat-completions with bounded retry.

    Retries only transient failures (connection errors, HTTP 429 and 5xx),
    with exponential backoff starting at BACKOFF_START seconds.  Other error
    statuses surface immediately as provider-error.
    """

    live = True

    def __init__(
        self,
        base_url: str,
        api_key: str,
        timeout: float = 60.0,
        sleeper: Callable[[float], None] = time.sleep,
        client: Optional[httpx.Client] = None,
    ):
        self.base_url = base_url.rstrip("/")
        self.api_key = api_key
        self.timeout = timeout
        self._sleep = sleeper
        self._client = client or httpx.Client(timeout=timeout)

    def complete(self, transcript: ChatTranscript) -> str:
        url = f"{self.base_url}/chat/completions"
        headers = {"Authorization": f"Bearer {self.api_key}"}
        delay = BACKOFF_START
        last_error: Optional[str] = None
        for attempt in range(1, MAX_ATTEMPTS + 1):
            try:
                response = self._client.post(
                    url, json=request_payload(transcript), headers=headers
                )
            except httpx.TransportError as exc:
                last_error = str(exc)
            else:
                if response.status_code == 200:
                    return self._extract(response)
                if response.status_code == 429 or response.status_code >= 500:
                    last_error = f"HTTP {response.status_code}"
                else:
                    raise ProviderError(
                        f"provider rejected request: HTTP {response.status_code}",
                        details={"status": response.status_code,
                                 "body": response.text[:2000]},
                    )
            if attempt < MAX_ATTEMPTS:
                self._sleep(delay)
                delay *= 2
        raise RetriesExhaustedError(
            f"gave up after {MAX_ATTEMPTS} attempts: {last_error}",
            details={"attempts": MAX_ATTEMPTS, "last_error": last_error},
        )

    @staticmethod
    def _extract(response: httpx.Response) -> str:
        try:
            return response.json()["choices"][0]["message"]["content"]
        except (KeyError, IndexError, ValueError) as exc:
            raise ProviderError(
                f"malformed completion response: {exc}",
                details={"body": response.text[:2000]},
            ) from exc


class ReplayTransport(Transport):
    """Serve recorded responses by request fingerprint; never touches the network."""

    def __init__(self, path: str):
        # error details embed the path, so keep it a plain string
        self.path = str(path)
        self._responses: dict[str, str] = {}
        try:
            fh = open(path, encoding="utf-8")
        except OSError as exc:
            raise ValidationFailure(
                f"cannot open fixture file {path}: {exc}",
                details={"path": str(path)},
            ) from exc
        with fh:
            for line in fh:
                line = line.strip()
                if not line:
                    continue
                entry = json.loads(line)
                self._responses[entry["fingerprint"]] = entry["response"]

    def __len__(self) -> int:
        return len(self._responses)

    def complete(self, transcript: ChatTranscript) -> str:
        token = fingerprint(transcript)
        if token not in self._responses:
            raise FixtureMissError(
                f"no recorded response for fingerprint {token}",
                details={
                    "fingerprint": token,
                    "fixture_path": self.path,
                    "model": transcript.model,
                    "last_message": transcript.messages[-1].content[:200],
                },
            )
        return self._responses[token]


class RecordTransport(Transport):
    """Delegate to an inner transport and append new exchanges to a fixture file.

    Appends are atomic per entry (one full line per write) and deduplicated
    by fingerprint, so re-recording a flow leaves existing entries alone.
    """

    def __init__(self, inner: Transport, path: str):
        self.inner = inner
        self.path = str(path)
        self._lock = threading.Lock()
        self._known: set[str] = set()
        if os.path.exists(path):
            with open(path, encoding="utf-8") as fh:
                for line in fh:
                    line = line.strip()
                    if line:
                        self._known.add(json.loads(line)["fingerprint"])

    @property
    def live(self) -> bool:  # type: ignore[override]
        return self.inner.live

    def complete(self, transcript: ChatTranscript) -> str:
        response = self.inner.complete(transcript)
        token = fingerprint(transcript)
        with self._lock:
            if token not in self._known:
                entry = {
                    "fingerprint": token,
                    "request": request_payload(transcript),
                    "response": response,
                }
                with open(self.path, "a", encoding="utf-8") as fh:
                    fh.write(json.dumps(entry, ensure_ascii=False) + "\n")
                self._known.add(token)
        return response


class QueueTransport(Transport):
    """Hand out pre-planned responses in order; for tests and fixture building."""

    def __init__(self, responses: Optional[list[str]] = None):
        self.responses = deque(responses or [])
        self.requests: list[ChatTranscript] = []

    def push(self, *responses: str) -> None:
        self.responses.extend(responses)

    def complete(self, transcript: ChatTranscript) -> str:
        self.requests.append(transcript)
        if not self.responses:
            raise ProviderError("queue transport exhausted")
        return self.responses.popleft()


# --- concurrency cap ---

class FifoSemaphore:
    """Counting semaphore whose waiters acquire strictly in arrival order."""

    def __init__(self, capacity: int):
        if capacity < 1:
            raise ValidationFailure("concurrency cap must be >= 1")
        self._capacity = capacity
        self._active = 0
        self._queue: deque[object] = deque()
        self._cond = threading.Condition()

    def set_capacity(self, capacity: int) -> None:
        """Applies to subsequent acquisitions; holders are never revoked."""
        if capacity < 1:
            raise ValidationFailure("concurrency cap must be >= 1")
        with self._cond:
            self._capacity = capacity
            self._cond.notify_all()

    def acquire(self) -> None:
        token = object()
        with self._cond:
            self._queue.append(token)
            while not (
                self._queue[0] is token and self._active < self._capacity
            ):
                self._cond.wait()
            self._queue.popleft()
            self._active += 1
            self._cond.notify_all()

    def release(self) -> None:
        with self._cond:
            self._active -= 1
            self._cond.notify_all()

    def __enter__(self) -> "FifoSemaphore":
        self.acquire()
        return self

    def __exit__(self, *exc) -> None:
        self.release()


# --- run journal ---

class Journal:
    """Append-only prompt/response audit log, one JSON object per line."""

    def __init__(self, path: Optional[str]):
        self.path = path
        self._lock = threading.Lock()

    def append(self, kind: str, **payload) -> None:
        if self.path is None:
            return
        entry = {"ts": time.time(), "kind": kind, **payload}
        with self._lock:
            with open(self.path, "a", encoding="utf-8") as fh:
                fh.write(json.dumps(entry, ensure_ascii=False) + "\n")


# --- gateway ---

class Gateway:
    """Shared completion front door: cap, journal, transport."""

    def __init__(
        self,
        transport: Transport,
        cap: int = 4,
        journal: Optional[Journal] = None,
    ):
        self.transport = transport
        self.semaphore = FifoSemaphore(cap)
        self.journal = journal or Journal(None)

    def complete(
        self, transcript: ChatTranscript, kind: str = "completion", **meta
    ) -> str:
        transcript.ready_for_completion()
        token = fingerprint(transcript)
        if self.transport.live:
            # the cap bounds in-flight network calls; replay needs no limit
            with self.semaphore:
                response = self.transport.complete(transcript)
        else:
            response = self.transport.complete(transcript)
        self.journal.append(
            kind,
            fingerprint=token,
            request=request_payload(transcript),
            response=response,
            **meta,
        )
        return response


def bundled_fixture_path() -> str:
    return str(resources.files("storyloom") / "fixtures" / "fixtures.jsonl")


def gateway_from_env(
    transport: Optional[str] = None,
    fixtures: Optional[str] = None,
    cap: int = 4,
    journal_path: Optional[str] = None,
) -> Gateway:
    """Build a gateway from environment variables, with explicit overrides.

    Transport defaults to replay against the bundled fixture file, so a fresh
    checkout works offline; live mode needs an API key in the environment.
    """
    mode = (transport or os.getenv(ENV_TRANSPORT) or "replay").strip().lower()
    fixture_path = fixtures or os.getenv(ENV_FIXTURES) or bundled_fixture_path()
    if mode == "replay":
        built: Transport = ReplayTransport(fixture_path)
    elif mode in ("live", "record"):
        api_key = os.getenv(ENV_API_KEY) or os.getenv(ENV_API_KEY_FALLBACK) or ""
        if not api_key:
            raise ValidationFailure(
                f"{mode} transport needs {ENV_API_KEY} (or {ENV_API_KEY_FALLBACK})"
            )
        base_url = os.getenv(ENV_BASE_URL) or DEFAULT_BASE_URL
        built = LiveTransport(base_url, api_key)
        if mode == "record":
            built = RecordTransport(built, fixture_path)
    else:
        raise ValidationFailure(
            f"unknown transport {mode!r} (expected live, record, or replay)"
        )
    return Gateway(built, cap=cap, journal=Journal(journal_path))
