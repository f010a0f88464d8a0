"""Chat-endpoint client, deterministic mock responders, response extraction,
and the fine-tuning dataset exporter.

The client speaks the common chat-completions wire shape and keeps retry,
rate-limit, and audit discipline in one place.  Everything testable offline
is: responders are plain callables `(ChatExchange) -> str`.
"""

from __future__ import annotations

import json
import os
import re
import threading
import time
import uuid
from dataclasses import dataclass
from pathlib import Path as FsPath
from typing import Callable, Optional, Sequence, Union

from .core import SvgDocument
from .errors import (
    AuthError,
    FixtureMissing,
    RateLimited,
    TransportError,
)
from .prompts import ANSWER_PHRASE, ChatExchange, finetune_human_turn

API_KEY_ENV = "SVGLAB_API_KEY"
BASE_URL_ENV = "SVGLAB_BASE_URL"
DEFAULT_BASE_URL = "https://api.openai.com"
CHAT_PATH = "/v1/chat/completions"

Responder = Callable[[ChatExchange], str]


@dataclass
class EndpointConfig:
    base_url: str = ""
    model: str = "gpt-4"
    api_key: Optional[str] = None
    timeout: float = 120.0
    max_attempts: int = 5
    backoff_base: float = 1.0
    backoff_factor: float = 2.0
    max_in_flight: int = 4
    requests_per_second: Optional[float] = None

    def resolved_base_url(self) -> str:
        return self.base_url or os.environ.get(BASE_URL_ENV, "") or DEFAULT_BASE_URL

    def resolved_api_key(self) -> Optional[str]:
        return self.api_key or os.environ.get(API_KEY_ENV)


class ChatClient:
    """HTTP chat client with exponential backoff and an audit trail.

    `session` and `sleep` are injectable for tests; the audit log never
    contains the credential.
    """

    def __init__(self, config: Optional[EndpointConfig] = None,
                 session=None, sleep: Callable[[float], None] = time.sleep,
                 audit_path: Optional[Union[str, FsPath]] = None):
        self.config = config or EndpointConfig()
        if session is None:
            import requests

            session = requests.Session()
        self.session = session
        self.sleep = sleep
        self.audit_path = FsPath(audit_path) if audit_path else None
        self.audit: list[dict] = []
        self._gate = threading.Semaphore(self.config.max_in_flight)
        self._rate_lock = threading.Lock()
        self._next_allowed = 0.0

    def _throttle(self) -> None:
        rate = self.config.requests_per_second
        if not rate:
            return
        with self._rate_lock:
            now = time.monotonic()
            wait = self._next_allowed - now
            self._next_allowed = max(now, self._next_allowed) + 1.0 / rate
        if wait > 0:
            self.sleep(wait)

    def _record(self, entry: dict) -> None:
        self.audit.append(entry)
        if self.audit_path:
            with open(self.audit_path, "a") as fh:
                fh.write(json.dumps(entry, sort_keys=True) + "\n")

    def chat(self, exchange: ChatExchange) -> str:
        """Send one exchange; returns the assistant text."""
        key = self.config.resolved_api_key()
        if not key:
            raise AuthError(f"no credential; set {API_KEY_ENV}")
        url = self.config.resolved_base_url().rstrip("/") + CHAT_PATH
        payload = {
            "model": exchange.model or self.config.model,
            "messages": [{"role": r, "content": t} for r, t in exchange.messages],
            "temperature": exchange.temperature,
            "max_tokens": exchange.max_tokens,
        }
        idempotency_key = str(uuid.uuid4())
        headers = {
            "Authorization": f"Bearer {key}",
            "Idempotency-Key": idempotency_key,
        }

        last_error: Optional[str] = None
        with self._gate:
            for attempt in range(self.config.max_attempts):
                if attempt:
                    delay = self.config.backoff_base * self.config.backoff_factor ** (attempt - 1)
                    self.sleep(delay)
                self._throttle()
                try:
                    response = self.session.post(url, json=payload, headers=headers,
                                                 timeout=self.config.timeout)
                except Exception as exc:
                    last_error = f"transport: {exc}"
                    continue
                status = getattr(response, "status_code", 0)
                if status in (401, 403):
                    self._record({"key": idempotency_key, "status": status,
                                  "outcome": "auth-error"})
                    raise AuthError(f"endpoint rejected credential (HTTP {status})")
                if status == 429 or status >= 500:
                    last_error = f"HTTP {status}"
                    continue
                if status != 200:
                    self._record({"key": idempotency_key, "status": status,
                                  "outcome": "error"})
                    raise TransportError(f"unexpected HTTP {status}")
                body = response.json()
                text = body["choices"][0]["message"]["content"]
                self._record({
                    "key": idempotency_key,
                    "status": 200,
                    "outcome": "ok",
                    "model": payload["model"],
                    "prompt_chars": sum(len(m["content"]) for m in payload["messages"]),
                    "response_chars": len(text),
                })
                return text

        self._record({"key": idempotency_key, "outcome": "exhausted", "error": last_error})
        if last_error and "429" in last_error:
            raise RateLimited(f"gave up after {self.config.max_attempts} attempts: {last_error}")
        raise TransportError(f"gave up after {self.config.max_attempts} attempts: {last_error}")


def chat(exchange: ChatExchange, config: Optional[EndpointConfig] = None, **kwargs) -> str:
    return ChatClient(config, **kwargs).chat(exchange)


# --- mock responders -----------------------------------------------------------

class EchoResponder:
    """Returns the final user message verbatim."""

    name = "echo"

    def __call__(self, exchange: ChatExchange) -> str:
        return exchange.last_user_text


class ScriptedResponder:
    """Replays recorded responses in order (JSONL with a `response` field)."""

    name = "scripted"

    def __init__(self, fixture: Union[str, FsPath, Sequence[str]]):
        if isinstance(fixture, (str, FsPath)):
            path = FsPath(fixture)
            if not path.exists():
                raise FixtureMissing(str(path))
            self.responses = [json.loads(line)["response"]
                              for line in path.read_text().splitlines() if line.strip()]
        else:
            self.responses = list(fixture)
        self._index = 0

    def __call__(self, exchange: ChatExchange) -> str:
        if self._index >= len(self.responses):
            raise FixtureMissing(f"fixture exhausted after {self._index} responses")
        text = self.responses[self._index]
        self._index += 1
        return text


class OracleResponder:
    """Answers with the suite's ground truth in the expected phrasing.

    The benchmark harness binds the answers before dispatch; using an unbound
    oracle is an error.
    """

    name = "oracle"

    def __init__(self) -> None:
        self.answers: Optional[list[str]] = None
        self._index = 0

    def bind(self, answers: Sequence[str]) -> None:
        self.answers = list(answers)
        self._index = 0

    def __call__(self, exchange: ChatExchange) -> str:
        if self.answers is None:
            raise FixtureMissing("oracle responder is not bound to a suite")
        if self._index >= len(self.answers):
            raise FixtureMissing("oracle ran out of answers")
        text = self.answers[self._index]
        self._index += 1
        return text


class LiveResponder:
    """Adapter presenting a ChatClient as a responder."""

    name = "live"

    def __init__(self, client: ChatClient):
        self.client = client

    def __call__(self, exchange: ChatExchange) -> str:
        return self.client.chat(exchange)


def mock_responder(mode: str, fixture: Optional[Union[str, FsPath, Sequence[str]]] = None):
    if mode == "echo":
        return EchoResponder()
    if mode == "scripted":
        if fixture is None:
            raise FixtureMissing("scripted responder needs a fixture")
        return ScriptedResponder(fixture)
    if mode == "oracle":
        return OracleResponder()
    raise ValueError(f"unknown responder mode {mode!r}")


# --- extraction ------------------------------------------------------------------

_PHRASE_RE = re.compile(re.escape(ANSWER_PHRASE) + r"\s*:?\s*(\d)")
_STANDALONE_DIGIT_RE = re.compile(r"(?<!\d)(?<!\d\.)(\d)(?!\d)(?!\.\d)")
_SVG_BLOCK_RE = re.compile(r"<svg\b.*?</svg>", re.DOTALL | re.IGNORECASE)


def extract_digit(text: str) -> Optional[int]:
    """Digit label from free text: the answer-scaffold phrase wins, then the
    last standalone digit; None means abstain."""
    matches = _PHRASE_RE.findall(text)
    if matches:
        return int(matches[-1])
    loose = _STANDALONE_DIGIT_RE.findall(text)
    if loose:
        return int(loose[-1])
    return None


def extract_svg(text: str) -> Optional[SvgDocument]:
    """First balanced <svg>...</svg> block that parses leniently, else None."""
    from .parser import parse_svg

    for match in _SVG_BLOCK_RE.finditer(text):
        try:
            return parse_svg(match.group(0))
        except Exception:
            continue
    return None


# --- fine-tune export ---------------------------------------------------------------

def export_finetune_dataset(samples, path: Union[str, FsPath]) -> int:
    """Write conversation-format records (one human turn asking which digit the
    SVG reflects, one gpt turn with the bare label).  Returns the count."""
    if not samples:
        raise ValueError("no samples to export")
    records = []
    for i, sample in enumerate(samples):
        records.append({
            "id": f"{i:06d}",
            "conversations": [
                {"from": "human", "value": finetune_human_turn(sample.svg)},
                {"from": "gpt", "value": str(sample.label)},
            ],
        })
    FsPath(path).write_text(json.dumps(records, indent=1))
    return len(records)
