"""Deterministic in-process provider for offline tests and golden runs.

Completions come either from explicitly registered canned texts (keyed by the
same request digest the replay cache uses) or from a synthesizer that derives a
plausible, parseable response purely from the request digest. Latency is
synthetic and digest-derived, so an entire run is reproducible byte for byte.
Embeddings hash words onto fixed basis directions: identical texts always get
identical vectors, and unrelated words are (near-)orthogonal.
"""

from __future__ import annotations

import hashlib
import threading

import numpy as np

from ..metrics import TokenEmbeddingSet
from .base import (
    CompletionResult,
    GenerationParams,
    ImageAttachment,
    check_embed_texts,
    completion_digest,
)

FLAVOR_REPORT = "report"
FLAVOR_JUDGE = "judge"

# name / explanation / suggestion entries the report synthesizer draws from
_HAZARD_BANK = [
    (
        "Missing head protection",
        "A worker is visible without a helmet close to overhead loads.",
        "Stop work until every worker on the floor wears a rated helmet.",
    ),
    (
        "Unguarded trench edge",
        "The excavation edge has no barrier within stepping distance of the crew.",
        "Install edge protection and post warning signs before work resumes.",
    ),
    (
        "Worker beside swinging load",
        "A suspended load passes within arm's reach of two workers.",
        "Mark an exclusion zone under the crane path and keep the crew outside it.",
    ),
    (
        "Exposed wiring across walkway",
        "Uninsulated cables cross the main walkway at ground level.",
        "De-energize the run and reroute the cables through protected conduit.",
    ),
    (
        "Unstable material stack",
        "Pallets are stacked above shoulder height without strapping.",
        "Restack the pallets lower and strap each layer.",
    ),
    (
        "Debris on access route",
        "Offcuts and packaging cover the access route to the hoist.",
        "Clear the route and add housekeeping to the shift checklist.",
    ),
    (
        "Fatigued worker posture",
        "One worker is slumped against the railing mid-task.",
        "Rotate assignments and enforce the scheduled rest break.",
    ),
    (
        "Unattended ignition source",
        "A torch is burning with no operator in sight near stored fuel.",
        "Shut off the torch and move fuel containers away from the work area.",
    ),
]


def _digest_ints(digest_hex: str, count: int) -> list[int]:
    # slice the hex digest into independent 32-bit integers
    return [int(digest_hex[i * 8:(i + 1) * 8], 16) for i in range(count)]


class StubProvider:
    """Offline provider with registered or synthesized deterministic responses."""

    def __init__(
        self,
        flavor: str = FLAVOR_REPORT,
        embedding_dim: int = 256,
        severity_scale: tuple[int, int] = (1, 10),
    ):
        if flavor not in (FLAVOR_REPORT, FLAVOR_JUDGE):
            raise ValueError(f"unknown stub flavor {flavor!r}")
        self.flavor = flavor
        self.embedding_dim = embedding_dim
        self.severity_scale = severity_scale
        self._responses: dict[str, tuple[str, float | None]] = {}
        self._lock = threading.Lock()
        self.completion_calls = 0
        self.embed_sentence_calls = 0
        self.embed_tokens_calls = 0

    @property
    def total_calls(self) -> int:
        return self.completion_calls + self.embed_sentence_calls + self.embed_tokens_calls

    def reset_counters(self):
        with self._lock:
            self.completion_calls = 0
            self.embed_sentence_calls = 0
            self.embed_tokens_calls = 0

    def register(
        self,
        prompt: str,
        text: str,
        image: ImageAttachment | None = None,
        params: GenerationParams = GenerationParams(),
        latency: float | None = None,
    ):
        """Pin the completion for one exact request."""
        key = completion_digest(
            params.model_id, prompt, image.content_hash if image else None,
            params.temperature, params.max_tokens,
        )
        self._responses[key] = (text, latency)

    def complete(
        self,
        prompt: str,
        image: ImageAttachment | None = None,
        params: GenerationParams = GenerationParams(),
    ) -> CompletionResult:
        with self._lock:
            self.completion_calls += 1
        key = completion_digest(
            params.model_id, prompt, image.content_hash if image else None,
            params.temperature, params.max_tokens,
        )
        registered = self._responses.get(key)
        if registered is not None:
            text, latency = registered
        else:
            text, latency = self._synthesize(key), None
        if latency is None:
            latency = (_digest_ints(key, 1)[0] % 2000) / 1000.0  # 0..2 s, digest-derived
        return CompletionResult(text=text, latency=latency)

    def _synthesize(self, key: str) -> str:
        if self.flavor == FLAVOR_JUDGE:
            c, a, l = (1 + v % 5 for v in _digest_ints(key, 3))
            return f'{{"completeness": {c}, "accuracy": {a}, "clarity": {l}}}'
        return self._synthesize_report(key)

    def _synthesize_report(self, key: str) -> str:
        low, high = self.severity_scale
        ints = _digest_ints(key, 8)
        count = ints[0] % 4  # 0..3 hazards
        if count == 0:
            return "Summary: No hazards are present."
        start = ints[1] % len(_HAZARD_BANK)
        entries = [_HAZARD_BANK[(start + i) % len(_HAZARD_BANK)] for i in range(count)]
        names = [name for name, _, _ in entries]
        lines = [f"Summary: {'; '.join(names)}."]
        for i, (name, explanation, suggestion) in enumerate(entries, start=1):
            severity = low + ints[1 + i] % (high - low + 1)
            lines.append(f"Hazard No. {i}: {name}")
            lines.append(f"Severity: {severity}")
            lines.append(f"Explanation: {explanation}")
            lines.append(f"Suggestion: {suggestion}")
        return "\n".join(lines)

    # -- embeddings ---------------------------------------------------------

    def _word_direction(self, word: str) -> int:
        digest = hashlib.sha256(word.encode("utf-8")).hexdigest()
        return int(digest[:12], 16) % self.embedding_dim

    def embed_sentence(self, texts: list[str], model_id: str) -> list[np.ndarray]:
        items = check_embed_texts(texts)
        with self._lock:
            self.embed_sentence_calls += 1
        vectors = []
        for text in items:
            vec = np.zeros(self.embedding_dim)
            for word in text.split():
                vec[self._word_direction(word)] += 1.0
            vectors.append(vec / np.linalg.norm(vec))
        return vectors

    def embed_tokens(self, text: str, model_id: str) -> TokenEmbeddingSet:
        if not text.strip():
            raise ValueError("cannot embed tokens of a blank text")
        with self._lock:
            self.embed_tokens_calls += 1
        tokens = text.split()
        matrix = np.zeros((len(tokens), self.embedding_dim))
        for row, token in enumerate(tokens):
            matrix[row, self._word_direction(token)] = 1.0
        return TokenEmbeddingSet(tuple(tokens), matrix)
