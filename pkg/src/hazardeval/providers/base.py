"""Shared provider types: request parameters, image payloads, results, errors.

Every backend (HTTP adapters, the deterministic stub, the replay reader)
implements the same three operations: complete, embed_sentence, embed_tokens.
"""

from __future__ import annotations

import base64
import binascii
import hashlib
import json
import threading
import time
from dataclasses import dataclass, field

KIND_OPENAI = "openai_compatible"
KIND_GEMINI = "gemini_style"
KIND_STUB = "stub"
KIND_REPLAY = "replay"
LIVE_KINDS = (KIND_OPENAI, KIND_GEMINI)
ALL_KINDS = LIVE_KINDS + (KIND_STUB, KIND_REPLAY)

MEDIA_TYPES = ("jpeg", "png")


class ProviderError(Exception):
    """Base class for provider failures."""


class AuthError(ProviderError):
    """Credential missing or rejected; never retried."""


class TransientError(ProviderError):
    """Retryable failure: HTTP 429, 5xx, timeouts, connection drops."""


class RetryExhaustedError(ProviderError):
    """Transient failures persisted through every allowed attempt."""


class MalformedResponseError(ProviderError):
    """Provider answered but the body did not match the wire format."""


class ReplayMissError(ProviderError):
    """Replay provider found no recorded entry for the request."""


@dataclass(frozen=True)
class GenerationParams:
    temperature: float = 0.3
    max_tokens: int = 250
    model_id: str = ""

    def __post_init__(self):
        if self.temperature < 0:
            raise ValueError(f"temperature must be >= 0, got {self.temperature}")
        if self.max_tokens < 1:
            raise ValueError(f"max_tokens must be positive, got {self.max_tokens}")


@dataclass(frozen=True)
class RetryPolicy:
    max_attempts: int = 3
    base_backoff: float = 0.5  # seconds; doubles per retry

    def __post_init__(self):
        if self.max_attempts < 1:
            raise ValueError(f"max_attempts must be >= 1, got {self.max_attempts}")
        if self.base_backoff < 0:
            raise ValueError(f"base_backoff must be >= 0, got {self.base_backoff}")


@dataclass(frozen=True)
class ProviderConfig:
    kind: str
    base_url: str = ""
    credential_ref: str = ""  # name of the env var holding the key, never the key
    timeout: float = 60.0
    retry: RetryPolicy = field(default_factory=RetryPolicy)
    rate_limit: float = 60.0  # requests per minute

    def __post_init__(self):
        if self.kind not in ALL_KINDS:
            raise ValueError(f"unknown provider kind {self.kind!r}")
        if self.timeout <= 0:
            raise ValueError(f"timeout must be positive, got {self.timeout}")
        if self.kind in LIVE_KINDS and self.rate_limit <= 0:
            raise ValueError(f"rate_limit must be positive for {self.kind} providers")


@dataclass(frozen=True)
class TokenUsage:
    prompt: int
    completion: int


@dataclass(frozen=True)
class CompletionResult:
    text: str
    latency: float  # seconds, transport call only
    token_usage: TokenUsage | None = None

    def __post_init__(self):
        if self.latency < 0:
            raise ValueError(f"latency must be >= 0, got {self.latency}")


@dataclass(frozen=True)
class ImageAttachment:
    media_type: str
    data: str  # base64
    content_hash: str  # sha256 hex of the raw bytes

    def __post_init__(self):
        if self.media_type not in MEDIA_TYPES:
            raise ValueError(f"unsupported media type {self.media_type!r}")
        try:
            raw = base64.b64decode(self.data, validate=True)
        except (binascii.Error, ValueError) as exc:
            raise ValueError(f"image data is not valid base64: {exc}") from exc
        digest = hashlib.sha256(raw).hexdigest()
        if digest != self.content_hash:
            raise ValueError("image content_hash does not match decoded data")


def encode_image(data: bytes, media_type: str) -> ImageAttachment:
    """Base64-encode raw image bytes with a content digest for cache keys."""
    media = "jpeg" if media_type == "jpg" else media_type
    if media not in MEDIA_TYPES:
        raise ValueError(f"unsupported media type {media_type!r} (expected jpeg or png)")
    if not data:
        raise ValueError("cannot encode an empty image")
    return ImageAttachment(
        media_type=media,
        data=base64.b64encode(data).decode("ascii"),
        content_hash=hashlib.sha256(data).hexdigest(),
    )


def decode_image(image: ImageAttachment) -> bytes:
    return base64.b64decode(image.data, validate=True)


def media_type_for(path) -> str:
    suffix = str(path).rsplit(".", 1)[-1].lower()
    if suffix in ("jpg", "jpeg"):
        return "jpeg"
    if suffix == "png":
        return "png"
    raise ValueError(f"unsupported image file type: {path}")


def completion_digest(
    model_id: str,
    prompt: str,
    image_hash: str | None,
    temperature: float,
    max_tokens: int,
) -> str:
    """Identity of a completion request; keys the replay cache."""
    return _digest(["complete", model_id, prompt, image_hash or "", temperature, max_tokens])


def embed_sentence_digest(model_id: str, texts: list[str]) -> str:
    return _digest(["embed_sentence", model_id, list(texts)])


def embed_tokens_digest(model_id: str, text: str) -> str:
    return _digest(["embed_tokens", model_id, text])


def _digest(payload) -> str:
    canonical = json.dumps(payload, ensure_ascii=False, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def check_embed_texts(texts) -> list[str]:
    items = list(texts)
    if not items:
        raise ValueError("embedding input list is empty")
    for i, text in enumerate(items):
        if not isinstance(text, str) or not text.strip():
            raise ValueError(f"embedding input {i} is blank")
    return items


class RateLimiter:
    """Token bucket limiting requests per minute; thread-safe, blocking acquire."""

    def __init__(self, per_minute: float, clock=time.monotonic, sleeper=time.sleep):
        if per_minute <= 0:
            raise ValueError("rate limit must be positive")
        self._rate = per_minute / 60.0  # tokens per second
        self._capacity = max(1.0, per_minute / 60.0)
        self._tokens = self._capacity
        self._updated = clock()
        self._clock = clock
        self._sleep = sleeper
        self._lock = threading.Lock()

    def acquire(self):
        while True:
            with self._lock:
                now = self._clock()
                self._tokens = min(self._capacity, self._tokens + (now - self._updated) * self._rate)
                self._updated = now
                if self._tokens >= 1.0:
                    self._tokens -= 1.0
                    return
                wait = (1.0 - self._tokens) / self._rate
            self._sleep(wait)


def run_with_retries(fn, policy: RetryPolicy, sleeper=time.sleep):
    """Call fn, retrying transient failures with exponential backoff.

    Auth and malformed-response errors pass straight through; transient errors
    that survive max_attempts become RetryExhaustedError.
    """
    attempt = 1
    while True:
        try:
            return fn()
        except TransientError as exc:
            if attempt >= policy.max_attempts:
                raise RetryExhaustedError(
                    f"giving up after {attempt} attempts: {exc}"
                ) from exc
            sleeper(policy.base_backoff * (2 ** (attempt - 1)))
            attempt += 1
