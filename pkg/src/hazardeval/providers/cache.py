"""Content-addressed record/replay store for provider responses.

Every response is written to <cache_root>/<digest>.json together with the
request fields that produced it and the measured latency. CachingProvider
wraps any live provider: hits return the recorded response (including its
recorded latency) without touching the inner provider; misses pass through and
record. ReplayProvider reads the same store and refuses on a miss, giving a
fully offline provider kind.
"""

from __future__ import annotations

import json
import os
import threading
from pathlib import Path

import numpy as np

from ..metrics import TokenEmbeddingSet
from .base import (
    CompletionResult,
    GenerationParams,
    ImageAttachment,
    ReplayMissError,
    TokenUsage,
    completion_digest,
    embed_sentence_digest,
    embed_tokens_digest,
)


class ReplayCache:
    """Directory of {request, response, latency} entries keyed by request digest."""

    def __init__(self, root: str | Path):
        self.root = Path(root)
        self._lock = threading.Lock()

    def get(self, digest: str) -> dict | None:
        path = self.root / f"{digest}.json"
        try:
            return json.loads(path.read_text(encoding="utf-8"))
        except FileNotFoundError:
            return None

    def put(self, digest: str, entry: dict):
        with self._lock:
            self.root.mkdir(parents=True, exist_ok=True)
            path = self.root / f"{digest}.json"
            tmp = path.with_suffix(".tmp")
            tmp.write_text(json.dumps(entry, ensure_ascii=False, indent=2), encoding="utf-8")
            os.replace(tmp, path)

    def __len__(self) -> int:
        if not self.root.is_dir():
            return 0
        return sum(1 for _ in self.root.glob("*.json"))


def _completion_entry(request: dict, result: CompletionResult) -> dict:
    usage = None
    if result.token_usage is not None:
        usage = {"prompt": result.token_usage.prompt, "completion": result.token_usage.completion}
    return {
        "kind": "complete",
        "request": request,
        "response": {"text": result.text, "token_usage": usage},
        "latency": result.latency,
    }


def _completion_from_entry(entry: dict) -> CompletionResult:
    response = entry["response"]
    usage = response.get("token_usage")
    return CompletionResult(
        text=response["text"],
        latency=entry["latency"],
        token_usage=TokenUsage(**usage) if usage else None,
    )


class CachingProvider:
    """Record/replay wrapper: serve hits from the cache, record misses."""

    def __init__(self, inner, cache: ReplayCache):
        self.inner = inner
        self.cache = cache

    def complete(
        self,
        prompt: str,
        image: ImageAttachment | None = None,
        params: GenerationParams = GenerationParams(),
    ) -> CompletionResult:
        image_hash = image.content_hash if image else None
        digest = completion_digest(params.model_id, prompt, image_hash, params.temperature, params.max_tokens)
        entry = self.cache.get(digest)
        if entry is not None:
            return _completion_from_entry(entry)
        result = self.inner.complete(prompt, image=image, params=params)
        request = {
            "model_id": params.model_id,
            "prompt": prompt,
            "image_hash": image_hash,
            "temperature": params.temperature,
            "max_tokens": params.max_tokens,
        }
        self.cache.put(digest, _completion_entry(request, result))
        return result

    def embed_sentence(self, texts: list[str], model_id: str) -> list[np.ndarray]:
        items = list(texts)
        digest = embed_sentence_digest(model_id, items)
        entry = self.cache.get(digest)
        if entry is not None:
            return [np.asarray(vec, dtype=float) for vec in entry["response"]["vectors"]]
        vectors = self.inner.embed_sentence(items, model_id)
        self.cache.put(
            digest,
            {
                "kind": "embed_sentence",
                "request": {"model_id": model_id, "texts": items},
                "response": {"vectors": [vec.tolist() for vec in vectors]},
                "latency": 0.0,
            },
        )
        return vectors

    def embed_tokens(self, text: str, model_id: str) -> TokenEmbeddingSet:
        digest = embed_tokens_digest(model_id, text)
        entry = self.cache.get(digest)
        if entry is not None:
            response = entry["response"]
            return TokenEmbeddingSet(tuple(response["tokens"]), np.asarray(response["vectors"], dtype=float))
        embedded = self.inner.embed_tokens(text, model_id)
        self.cache.put(
            digest,
            {
                "kind": "embed_tokens",
                "request": {"model_id": model_id, "text": text},
                "response": {"tokens": list(embedded.tokens), "vectors": embedded.vectors.tolist()},
                "latency": 0.0,
            },
        )
        return embedded


class ReplayProvider:
    """Read-only provider backed entirely by previously recorded responses."""

    def __init__(self, cache: ReplayCache):
        self.cache = cache

    def _entry(self, digest: str, description: str) -> dict:
        entry = self.cache.get(digest)
        if entry is None:
            raise ReplayMissError(f"no recorded response for {description} (digest {digest[:12]}…)")
        return entry

    def complete(
        self,
        prompt: str,
        image: ImageAttachment | None = None,
        params: GenerationParams = GenerationParams(),
    ) -> CompletionResult:
        image_hash = image.content_hash if image else None
        digest = completion_digest(params.model_id, prompt, image_hash, params.temperature, params.max_tokens)
        return _completion_from_entry(self._entry(digest, f"completion for model {params.model_id}"))

    def embed_sentence(self, texts: list[str], model_id: str) -> list[np.ndarray]:
        digest = embed_sentence_digest(model_id, list(texts))
        entry = self._entry(digest, f"sentence embeddings from {model_id}")
        return [np.asarray(vec, dtype=float) for vec in entry["response"]["vectors"]]

    def embed_tokens(self, text: str, model_id: str) -> TokenEmbeddingSet:
        digest = embed_tokens_digest(model_id, text)
        entry = self._entry(digest, f"token embeddings from {model_id}")
        response = entry["response"]
        return TokenEmbeddingSet(tuple(response["tokens"]), np.asarray(response["vectors"], dtype=float))
