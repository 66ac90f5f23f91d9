"""Chat-completion gateway with a content-addressed record/replay cache.

Modes:

``replay``  serve from the cache only; a miss raises :class:`CacheMiss`.
``record``  serve from the cache, otherwise call the endpoint and persist.
``live``    always call the endpoint, never touch the cache.

A token-limit rejection is not a completion, so no record is stored for it.
In record mode a small marker file (``<hash>.limit.json``) is written instead
so that replay re-raises the same rejection and the caller's trim-and-retry
path is reproduced exactly.
"""

from __future__ import annotations

import hashlib
import json
import logging
import os
import tempfile
import threading
import time
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Callable

from .corpus import ClinicalDocument, SampleSet
from .errors import CacheMiss, CredentialsMissing, TokenLimitExceeded, TransportFailure
from .parser import ExtractedEntity, ParseReport, parse_response, strip_preamble
from .prompts import BudgetConfig, PromptArtifact, TemplateSet, build_prompt, trim_entity_samples
from .transport import HttpResponse, HttpxTransport, Transport, TransportError
from .vocab import PromptStrategy

logger = logging.getLogger(__name__)

MODES = ("record", "replay", "live")
TOKEN_LIMIT_CODES = {"rate_limit_exceeded", "context_length_exceeded", "tokens_exceeded", "token_limit_exceeded"}


@dataclass(frozen=True)
class GenerationConfig:
    model_id: str
    temperature: float = 0.2
    top_p: float = 1.0
    max_output_tokens: int = 4096

    def __post_init__(self):
        if not 0 <= self.temperature <= 2:
            raise ValueError(f"temperature must be in [0, 2], got {self.temperature}")
        if not 0 < self.top_p <= 1:
            raise ValueError(f"top_p must be in (0, 1], got {self.top_p}")
        if self.max_output_tokens <= 0:
            raise ValueError("max_output_tokens must be positive")


@dataclass(frozen=True)
class CompletionRecord:
    prompt_hash: str
    response_text: str
    latency_seconds: float
    request_tokens: int = -1
    response_tokens: int = -1
    timestamp: str = ""
    model_id: str = ""

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> CompletionRecord:
        return cls(**{k: data[k] for k in cls.__dataclass_fields__ if k in data})


def prompt_hash(prompt_text: str, config: GenerationConfig) -> str:
    payload = json.dumps(
        {"prompt": prompt_text, "config": asdict(config)},
        sort_keys=True,
        ensure_ascii=False,
        separators=(",", ":"),
    )
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()


def _write_json_atomic(path: Path, data: dict) -> None:
    fd, tmp = tempfile.mkstemp(dir=path.parent, suffix=".tmp")
    with os.fdopen(fd, "w", encoding="utf-8") as fh:
        json.dump(data, fh, indent=2, ensure_ascii=False)
        fh.write("\n")
    os.replace(tmp, path)


class CompletionCache:
    """One JSON file per completion, named by prompt hash."""

    def __init__(self, directory: Path):
        self.directory = Path(directory)
        self.directory.mkdir(parents=True, exist_ok=True)
        self._lock = threading.Lock()

    def path(self, key: str) -> Path:
        return self.directory / f"{key}.json"

    def get(self, key: str) -> CompletionRecord | None:
        path = self.path(key)
        if not path.exists():
            return None
        return CompletionRecord.from_dict(json.loads(path.read_text(encoding="utf-8")))

    def put(self, record: CompletionRecord) -> None:
        with self._lock:
            _write_json_atomic(self.path(record.prompt_hash), record.to_dict())

    def token_limit(self, key: str) -> str | None:
        path = self.directory / f"{key}.limit.json"
        if not path.exists():
            return None
        return json.loads(path.read_text(encoding="utf-8"))["message"]

    def mark_token_limit(self, key: str, message: str) -> None:
        with self._lock:
            _write_json_atomic(self.directory / f"{key}.limit.json", {"prompt_hash": key, "message": message})

    def digest(self, keys) -> str:
        """SHA-256 over the stored bytes of ``keys`` (sorted), limit markers included."""
        h = hashlib.sha256()
        for key in sorted(set(keys)):
            for path in (self.path(key), self.directory / f"{key}.limit.json"):
                if path.exists():
                    h.update(path.name.encode())
                    h.update(path.read_bytes())
        return h.hexdigest()


class Gateway:
    def __init__(
        self,
        endpoint_url: str,
        config: GenerationConfig,
        cache: CompletionCache | None,
        mode: str = "replay",
        transport: Transport | None = None,
        api_key_env: str = "PROMPTNER_API_KEY",
        max_transport_retries: int = 3,
        backoff_seconds: float = 1.0,
        timeout: float = 300.0,
        sleep: Callable[[float], None] = time.sleep,
    ):
        if mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}, got {mode!r}")
        if mode != "live" and cache is None:
            raise ValueError(f"{mode} mode needs a completion cache")
        self.endpoint_url = endpoint_url
        self.config = config
        self.cache = cache
        self.mode = mode
        self._transport = transport
        self.api_key_env = api_key_env
        self.max_transport_retries = max_transport_retries
        self.backoff_seconds = backoff_seconds
        self.timeout = timeout
        self.sleep = sleep
        self.requests = 0
        self.used_hashes: list[str] = []
        self._count_lock = threading.Lock()

    @property
    def transport(self) -> Transport:
        if self._transport is None:
            self._transport = HttpxTransport()
        return self._transport

    def check_credentials(self) -> None:
        if self.mode != "replay" and not os.environ.get(self.api_key_env):
            raise CredentialsMissing(f"{self.mode} mode needs an API key in ${self.api_key_env}")

    def hash_for(self, prompt: PromptArtifact | str) -> str:
        text = prompt if isinstance(prompt, str) else prompt.text
        return prompt_hash(text, self.config)

    def complete(self, prompt: PromptArtifact | str) -> CompletionRecord:
        text = prompt if isinstance(prompt, str) else prompt.text
        key = prompt_hash(text, self.config)
        with self._count_lock:
            self.used_hashes.append(key)
        if self.mode != "live":
            cached = self.cache.get(key)
            if cached is not None:
                return cached
            limit = self.cache.token_limit(key)
            if limit is not None:
                raise TokenLimitExceeded(limit)
            if self.mode == "replay":
                raise CacheMiss(f"no cached completion for prompt {key[:12]}")
        self.check_credentials()
        try:
            record = self._request(text, key)
        except TokenLimitExceeded as exc:
            if self.mode == "record":
                self.cache.mark_token_limit(key, str(exc))
            raise
        if self.mode == "record":
            self.cache.put(record)
        return record

    def _payload(self, text: str) -> dict:
        return {
            "model": self.config.model_id,
            "messages": [{"role": "user", "content": text}],
            "temperature": self.config.temperature,
            "top_p": self.config.top_p,
            "max_tokens": self.config.max_output_tokens,
        }

    def _request(self, text: str, key: str) -> CompletionRecord:
        headers = {
            "Content-Type": "application/json",
            "Authorization": f"Bearer {os.environ.get(self.api_key_env, '')}",
        }
        payload = self._payload(text)
        last_error = ""
        for attempt in range(self.max_transport_retries + 1):
            if attempt:
                self.sleep(self.backoff_seconds * 2 ** (attempt - 1))
            with self._count_lock:
                self.requests += 1
            started = time.perf_counter()
            try:
                resp = self.transport.post_json(self.endpoint_url, payload, headers, self.timeout)
            except TransportError as exc:
                last_error = str(exc)
                logger.warning("request failed (attempt %d): %s", attempt + 1, exc)
                continue
            latency = time.perf_counter() - started
            if resp.status == 200:
                return self._record(resp, key, latency)
            if _is_token_limit(resp):
                raise TokenLimitExceeded(f"HTTP {resp.status}: {_error_message(resp)}")
            last_error = f"HTTP {resp.status}: {_error_message(resp)}"
            if resp.status < 500:
                break
            logger.warning("server error (attempt %d): %s", attempt + 1, last_error)
        raise TransportFailure(f"{self.endpoint_url}: {last_error}")

    def _record(self, resp: HttpResponse, key: str, latency: float) -> CompletionRecord:
        try:
            content = resp.body["choices"][0]["message"]["content"]
        except (KeyError, IndexError, TypeError) as exc:
            raise TransportFailure(f"unexpected completion payload: {exc!r}") from exc
        usage = resp.body.get("usage") or {}
        return CompletionRecord(
            prompt_hash=key,
            response_text=content or "",
            latency_seconds=latency,
            request_tokens=int(usage.get("prompt_tokens", -1)),
            response_tokens=int(usage.get("completion_tokens", -1)),
            timestamp=datetime.now(timezone.utc).isoformat(timespec="seconds"),
            model_id=self.config.model_id,
        )


def _error_message(resp: HttpResponse) -> str:
    body = resp.body
    if isinstance(body, dict):
        err = body.get("error")
        if isinstance(err, dict):
            return str(err.get("message") or err.get("code") or err)
        if err:
            return str(err)
    return str(body)[:200]


def _is_token_limit(resp: HttpResponse) -> bool:
    if resp.status == 429:
        return True
    if resp.status in (400, 413) and isinstance(resp.body, dict):
        err = resp.body.get("error")
        if isinstance(err, dict):
            return err.get("code") in TOKEN_LIMIT_CODES or err.get("type") in TOKEN_LIMIT_CODES
    return False


@dataclass
class StrategyContext:
    samples: SampleSet
    test_document: ClinicalDocument
    gateway: Gateway
    budget: BudgetConfig = field(default_factory=BudgetConfig)
    templates: TemplateSet | None = None
    max_token_retries: int = 1


@dataclass
class StrategyRun:
    strategy: PromptStrategy
    entities: list[ExtractedEntity]
    record: CompletionRecord
    report: ParseReport
    prompt: PromptArtifact
    token_limit_retries: int = 0


def run_strategy(strategy: PromptStrategy, ctx: StrategyContext) -> StrategyRun:
    """Build the prompt, complete it and parse the answer.

    A token-limit rejection of an entity prompt trims 10% (``budget.trim_fraction``)
    of each label's list and retries, at most ``ctx.max_token_retries`` times.
    """
    samples, trims, retries = ctx.samples, 0, 0
    while True:
        prompt = build_prompt(strategy, samples, ctx.test_document, ctx.budget, ctx.templates, trims=trims)
        try:
            record = ctx.gateway.complete(prompt)
            break
        except TokenLimitExceeded:
            if strategy is not PromptStrategy.FEW_SHOT_ENTITIES or retries >= ctx.max_token_retries:
                raise
            retries += 1
            logger.info("%s hit the token limit; trimming and retrying", strategy.display)
            samples = trim_entity_samples(prompt.samples, ctx.budget.trim_fraction)
            trims = prompt.trims + 1
    report = parse_response(strip_preamble(record.response_text), strategy)
    return StrategyRun(strategy, report.entities, record, report, prompt, retries)
