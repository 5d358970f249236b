"""HTTP adapters for chat-vision and embedding endpoints.

Two wire formats are supported: OpenAI-style chat completions / embeddings and
Gemini-style generateContent / batchEmbedContents. Open-weight models served
by a local inference server speak the OpenAI format, so they go through the
same adapter pointed at the local URL. Both adapters share rate limiting,
retry with exponential backoff, and transport-only latency measurement.
"""

from __future__ import annotations

import logging
import os
import time

import numpy as np
import requests

from ..metrics import TokenEmbeddingSet
from .base import (
    AuthError,
    CompletionResult,
    GenerationParams,
    ImageAttachment,
    MalformedResponseError,
    ProviderConfig,
    ProviderError,
    RateLimiter,
    TokenUsage,
    TransientError,
    check_embed_texts,
    run_with_retries,
)

logger = logging.getLogger(__name__)


def resolve_credential(config: ProviderConfig) -> str | None:
    """Look up the provider key by env-var name; never logs or stores the value."""
    if not config.credential_ref:
        return None
    value = os.environ.get(config.credential_ref)
    if value is None or not value.strip():
        raise AuthError(f"credential env var {config.credential_ref} is not set")
    return value


def _raise_for_status(status: int, body: str):
    if status in (401, 403):
        raise AuthError(f"provider rejected credentials (HTTP {status})")
    if status == 429 or status >= 500:
        raise TransientError(f"HTTP {status}: {body[:200]}")
    if status >= 400:
        raise ProviderError(f"HTTP {status}: {body[:200]}")


class _HttpProvider:
    """Shared transport plumbing: rate limit, retries, latency accounting."""

    def __init__(self, config: ProviderConfig, transport=None, sleeper=time.sleep):
        self.config = config
        self._limiter = RateLimiter(config.rate_limit, sleeper=sleeper)
        self._sleeper = sleeper
        if transport is None:
            session = requests.Session()

            def transport(url, payload, headers):
                return session.post(url, json=payload, headers=headers, timeout=config.timeout)

        self._transport = transport

    def _post(self, url: str, payload: dict, headers: dict) -> tuple[dict, float]:
        """POST with retry/backoff; returns (parsed body, transport latency)."""

        def attempt():
            self._limiter.acquire()
            start = time.perf_counter()
            try:
                response = self._transport(url, payload, headers)
            except requests.Timeout as exc:
                raise TransientError(f"request timed out after {self.config.timeout}s") from exc
            except requests.ConnectionError as exc:
                raise TransientError(f"connection failed: {exc}") from exc
            latency = time.perf_counter() - start
            _raise_for_status(response.status_code, getattr(response, "text", ""))
            try:
                return response.json(), latency
            except ValueError as exc:
                raise MalformedResponseError(f"response is not JSON: {exc}") from exc

        def logged_attempt():
            try:
                return attempt()
            except TransientError as exc:
                logger.warning("transient failure from %s: %s", url, exc)
                raise

        return run_with_retries(logged_attempt, self.config.retry, sleeper=self._sleeper)


class OpenAICompatibleProvider(_HttpProvider):
    """Chat-completions and embeddings over the OpenAI wire format."""

    def _headers(self) -> dict:
        headers = {"Content-Type": "application/json"}
        key = resolve_credential(self.config)
        if key:
            headers["Authorization"] = f"Bearer {key}"
        return headers

    def complete(
        self,
        prompt: str,
        image: ImageAttachment | None = None,
        params: GenerationParams = GenerationParams(),
    ) -> CompletionResult:
        content: list | str
        if image is None:
            content = prompt
        else:
            content = [
                {"type": "text", "text": prompt},
                {
                    "type": "image_url",
                    "image_url": {"url": f"data:image/{image.media_type};base64,{image.data}"},
                },
            ]
        payload = {
            "model": params.model_id,
            "messages": [{"role": "user", "content": content}],
            "temperature": params.temperature,
            "max_tokens": params.max_tokens,
        }
        body, latency = self._post(f"{self.config.base_url}/chat/completions", payload, self._headers())
        try:
            choice = body["choices"][0]
            text = choice["message"]["content"] or ""
        except (KeyError, IndexError, TypeError) as exc:
            raise MalformedResponseError(f"unexpected chat completion body: {exc}") from exc
        usage = body.get("usage") or {}
        token_usage = None
        if "prompt_tokens" in usage and "completion_tokens" in usage:
            token_usage = TokenUsage(prompt=usage["prompt_tokens"], completion=usage["completion_tokens"])
        return CompletionResult(text=text, latency=latency, token_usage=token_usage)

    def embed_sentence(self, texts: list[str], model_id: str) -> list[np.ndarray]:
        items = check_embed_texts(texts)
        payload = {"model": model_id, "input": items}
        body, _ = self._post(f"{self.config.base_url}/embeddings", payload, self._headers())
        try:
            rows = sorted(body["data"], key=lambda item: item["index"])
            vectors = [np.asarray(row["embedding"], dtype=float) for row in rows]
        except (KeyError, TypeError) as exc:
            raise MalformedResponseError(f"unexpected embeddings body: {exc}") from exc
        if len(vectors) != len(items):
            raise MalformedResponseError(f"expected {len(items)} embeddings, got {len(vectors)}")
        dims = {vec.shape[0] for vec in vectors}
        if len(dims) > 1:
            raise ProviderError(f"embedding dimensions differ across batch: {sorted(dims)}")
        return vectors

    def embed_tokens(self, text: str, model_id: str) -> TokenEmbeddingSet:
        # whitespace tokens; per-token vectors come from the embeddings endpoint
        tokens = _whitespace_tokens(text)
        vectors = self.embed_sentence(tokens, model_id)
        return TokenEmbeddingSet.from_raw(tokens, np.stack(vectors))


class GeminiStyleProvider(_HttpProvider):
    """generateContent and batchEmbedContents over the Gemini wire format."""

    def _headers(self) -> dict:
        headers = {"Content-Type": "application/json"}
        key = resolve_credential(self.config)
        if key:
            headers["x-goog-api-key"] = key
        return headers

    def complete(
        self,
        prompt: str,
        image: ImageAttachment | None = None,
        params: GenerationParams = GenerationParams(),
    ) -> CompletionResult:
        parts: list[dict] = [{"text": prompt}]
        if image is not None:
            parts.append({"inline_data": {"mime_type": f"image/{image.media_type}", "data": image.data}})
        payload = {
            "contents": [{"parts": parts}],
            "generationConfig": {
                "temperature": params.temperature,
                "maxOutputTokens": params.max_tokens,
            },
        }
        url = f"{self.config.base_url}/models/{params.model_id}:generateContent"
        body, latency = self._post(url, payload, self._headers())
        try:
            parts_out = body["candidates"][0]["content"]["parts"]
            text = "".join(part.get("text", "") for part in parts_out)
        except (KeyError, IndexError, TypeError) as exc:
            raise MalformedResponseError(f"unexpected generateContent body: {exc}") from exc
        usage = body.get("usageMetadata") or {}
        token_usage = None
        if "promptTokenCount" in usage and "candidatesTokenCount" in usage:
            token_usage = TokenUsage(prompt=usage["promptTokenCount"], completion=usage["candidatesTokenCount"])
        return CompletionResult(text=text, latency=latency, token_usage=token_usage)

    def embed_sentence(self, texts: list[str], model_id: str) -> list[np.ndarray]:
        items = check_embed_texts(texts)
        payload = {
            "requests": [
                {"model": f"models/{model_id}", "content": {"parts": [{"text": text}]}}
                for text in items
            ]
        }
        url = f"{self.config.base_url}/models/{model_id}:batchEmbedContents"
        body, _ = self._post(url, payload, self._headers())
        try:
            vectors = [np.asarray(entry["values"], dtype=float) for entry in body["embeddings"]]
        except (KeyError, TypeError) as exc:
            raise MalformedResponseError(f"unexpected batchEmbedContents body: {exc}") from exc
        if len(vectors) != len(items):
            raise MalformedResponseError(f"expected {len(items)} embeddings, got {len(vectors)}")
        dims = {vec.shape[0] for vec in vectors}
        if len(dims) > 1:
            raise ProviderError(f"embedding dimensions differ across batch: {sorted(dims)}")
        return vectors

    def embed_tokens(self, text: str, model_id: str) -> TokenEmbeddingSet:
        tokens = _whitespace_tokens(text)
        vectors = self.embed_sentence(tokens, model_id)
        return TokenEmbeddingSet.from_raw(tokens, np.stack(vectors))


def _whitespace_tokens(text: str) -> list[str]:
    tokens = text.split()
    if not tokens:
        raise ValueError("cannot embed tokens of a blank text")
    return tokens
