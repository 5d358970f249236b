"""Uniform access to chat-vision, embedding, and judge backends.

`build_provider` turns a ProviderConfig into a live adapter, a deterministic
stub, or a replay reader; the module-level complete/embed_* functions are
one-shot conveniences over that. Long-lived callers (the batch runner, the
service) should build a provider once and reuse it so rate limiting and stub
call counters behave.
"""

from __future__ import annotations

from pathlib import Path

from .base import (
    ALL_KINDS,
    AuthError,
    CompletionResult,
    GenerationParams,
    ImageAttachment,
    KIND_GEMINI,
    KIND_OPENAI,
    KIND_REPLAY,
    KIND_STUB,
    LIVE_KINDS,
    MalformedResponseError,
    ProviderConfig,
    ProviderError,
    RateLimiter,
    ReplayMissError,
    RetryExhaustedError,
    RetryPolicy,
    TokenUsage,
    TransientError,
    completion_digest,
    decode_image,
    embed_sentence_digest,
    embed_tokens_digest,
    encode_image,
    media_type_for,
    run_with_retries,
)
from .cache import CachingProvider, ReplayCache, ReplayProvider
from .http import GeminiStyleProvider, OpenAICompatibleProvider, resolve_credential
from .stub import FLAVOR_JUDGE, FLAVOR_REPORT, StubProvider

DEFAULT_CACHE_DIR = Path(".cache")


def provider_cache(cache_dir: str | Path | None = None) -> ReplayCache:
    root = Path(cache_dir) if cache_dir is not None else DEFAULT_CACHE_DIR
    return ReplayCache(root / "providers")


def build_provider(config: ProviderConfig, cache_dir: str | Path | None = None):
    """Construct the backend for a config; replay kinds read <cache_dir>/providers."""
    if config.kind == KIND_STUB:
        flavor = FLAVOR_JUDGE if config.base_url == "stub://judge" else FLAVOR_REPORT
        return StubProvider(flavor=flavor)
    if config.kind == KIND_REPLAY:
        return ReplayProvider(provider_cache(cache_dir))
    if config.kind == KIND_OPENAI:
        return OpenAICompatibleProvider(config)
    if config.kind == KIND_GEMINI:
        return GeminiStyleProvider(config)
    raise ProviderError(f"unknown provider kind {config.kind!r}")


def complete(config: ProviderConfig, prompt: str, image=None, params=GenerationParams(), cache_dir=None):
    return build_provider(config, cache_dir).complete(prompt, image=image, params=params)


def embed_sentence(config: ProviderConfig, texts, model_id: str, cache_dir=None):
    return build_provider(config, cache_dir).embed_sentence(texts, model_id)


def embed_tokens(config: ProviderConfig, text: str, model_id: str, cache_dir=None):
    return build_provider(config, cache_dir).embed_tokens(text, model_id)


__all__ = [
    "ALL_KINDS",
    "AuthError",
    "CachingProvider",
    "CompletionResult",
    "DEFAULT_CACHE_DIR",
    "FLAVOR_JUDGE",
    "FLAVOR_REPORT",
    "GeminiStyleProvider",
    "GenerationParams",
    "ImageAttachment",
    "KIND_GEMINI",
    "KIND_OPENAI",
    "KIND_REPLAY",
    "KIND_STUB",
    "LIVE_KINDS",
    "MalformedResponseError",
    "OpenAICompatibleProvider",
    "ProviderConfig",
    "ProviderError",
    "RateLimiter",
    "ReplayCache",
    "ReplayMissError",
    "ReplayProvider",
    "RetryExhaustedError",
    "RetryPolicy",
    "StubProvider",
    "TokenUsage",
    "TransientError",
    "build_provider",
    "complete",
    "completion_digest",
    "decode_image",
    "embed_sentence",
    "embed_sentence_digest",
    "embed_tokens",
    "embed_tokens_digest",
    "encode_image",
    "media_type_for",
    "provider_cache",
    "resolve_credential",
    "run_with_retries",
]
