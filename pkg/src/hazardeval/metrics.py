"""Similarity metrics for comparing predicted and reference assessment texts.

Two kernels: sentence-level cosine similarity between embedding vectors, and
token-level precision/recall/F1 via greedy max-similarity matching of token
embeddings. Per-sample scores aggregate into one row per (model, track).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

TRACK_HAZARD_DETECTION = "hazard_detection"
TRACK_OVERALL = "overall"
TRACKS = (TRACK_HAZARD_DETECTION, TRACK_OVERALL)

UNIT_NORM_TOL = 1e-6


class MetricError(ValueError):
    pass


def as_embedding(values) -> np.ndarray:
    """Validate and convert a sentence-level embedding to a 1-d float array."""
    vec = np.asarray(values, dtype=float)
    if vec.ndim != 1 or vec.size < 1:
        raise MetricError(f"embedding must be a 1-d vector, got shape {vec.shape}")
    if not np.all(np.isfinite(vec)):
        raise MetricError("embedding contains non-finite entries")
    return vec


@dataclass(frozen=True)
class TokenEmbeddingSet:
    """Tokens of one text plus one unit-normalized embedding row per token."""

    tokens: tuple[str, ...]
    vectors: np.ndarray  # shape (len(tokens), d)

    def __post_init__(self):
        mat = np.asarray(self.vectors, dtype=float)
        if mat.ndim != 2:
            raise MetricError(f"token embeddings must be a 2-d matrix, got shape {mat.shape}")
        if len(self.tokens) != mat.shape[0] or len(self.tokens) < 1:
            raise MetricError(
                f"token/vector count mismatch: {len(self.tokens)} tokens, {mat.shape[0]} vectors"
            )
        if not np.all(np.isfinite(mat)):
            raise MetricError("token embeddings contain non-finite entries")
        norms = np.linalg.norm(mat, axis=1)
        if np.any(np.abs(norms - 1.0) > UNIT_NORM_TOL):
            worst = float(np.max(np.abs(norms - 1.0)))
            raise MetricError(f"token embeddings must be unit-normalized (max deviation {worst:g})")
        object.__setattr__(self, "vectors", mat)

    @classmethod
    def from_raw(cls, tokens, vectors) -> "TokenEmbeddingSet":
        """Build a set from arbitrary non-zero vectors, normalizing each row."""
        mat = np.asarray(vectors, dtype=float)
        if mat.ndim != 2 or mat.shape[0] != len(tokens):
            raise MetricError("vectors must be one row per token")
        norms = np.linalg.norm(mat, axis=1, keepdims=True)
        if np.any(norms == 0.0):
            raise MetricError("cannot normalize a zero token vector")
        return cls(tuple(tokens), mat / norms)

    @property
    def dim(self) -> int:
        return self.vectors.shape[1]


def cosine_similarity(a, b) -> float:
    """Cosine of the angle between two embedding vectors, clamped to [-1, 1]."""
    va, vb = as_embedding(a), as_embedding(b)
    if va.shape != vb.shape:
        raise MetricError(f"dimension mismatch: {va.shape[0]} vs {vb.shape[0]}")
    norm_a = np.linalg.norm(va)
    norm_b = np.linalg.norm(vb)
    if norm_a == 0.0 or norm_b == 0.0:
        raise MetricError("cosine similarity is undefined for a zero vector")
    return float(np.clip(np.dot(va, vb) / (norm_a * norm_b), -1.0, 1.0))


def token_similarity(t, g) -> float:
    """Dot product of two unit vectors (equals their cosine similarity)."""
    vt, vg = as_embedding(t), as_embedding(g)
    if vt.shape != vg.shape:
        raise MetricError(f"dimension mismatch: {vt.shape[0]} vs {vg.shape[0]}")
    for name, vec in (("first", vt), ("second", vg)):
        if abs(np.linalg.norm(vec) - 1.0) > UNIT_NORM_TOL:
            raise MetricError(f"{name} token vector is not unit-normalized")
    return float(np.dot(vt, vg))


@dataclass(frozen=True)
class BertScore:
    precision: float
    recall: float
    f1: float


def bertscore(candidate: TokenEmbeddingSet, reference: TokenEmbeddingSet) -> BertScore:
    """Greedy token-matching score between candidate and reference token sets.

    Precision averages, over candidate tokens, the best similarity to any
    reference token; recall mirrors that over reference tokens; F1 is their
    harmonic mean (0 when precision + recall is 0).
    """
    if candidate.dim != reference.dim:
        raise MetricError(f"dimension mismatch: {candidate.dim} vs {reference.dim}")
    sim = candidate.vectors @ reference.vectors.T
    precision = float(sim.max(axis=1).mean())
    recall = float(sim.max(axis=0).mean())
    denom = precision + recall
    f1 = 0.0 if denom == 0.0 else 2.0 * precision * recall / denom
    return BertScore(precision=precision, recall=recall, f1=f1)


@dataclass(frozen=True)
class SampleScores:
    """Metric values for one (prediction, ground truth) pair on one track."""

    cosine: float
    bert_precision: float
    bert_recall: float
    bert_f1: float
    judge_normalized: float | None = None


@dataclass(frozen=True)
class ScoreRow:
    """Mean metrics for one model on one track, shaped like a results-table row."""

    model_id: str
    track: str
    cosine: float
    bert_precision: float
    bert_recall: float
    bert_f1: float
    judge_normalized: float | None
    n: int


def _mean(values: list[float]) -> float:
    # fsum: correctly rounded, so the mean is invariant under input permutation
    return math.fsum(values) / len(values)


def aggregate(samples: list[SampleScores], model_id: str, track: str) -> ScoreRow:
    """Arithmetic means of per-sample scores; judge mean skips unjudged samples."""
    if not samples:
        raise MetricError(f"no samples to aggregate for {model_id}/{track}")
    if track not in TRACKS:
        raise MetricError(f"unknown track {track!r}")
    judged = [s.judge_normalized for s in samples if s.judge_normalized is not None]
    return ScoreRow(
        model_id=model_id,
        track=track,
        cosine=_mean([s.cosine for s in samples]),
        bert_precision=_mean([s.bert_precision for s in samples]),
        bert_recall=_mean([s.bert_recall for s in samples]),
        bert_f1=_mean([s.bert_f1 for s in samples]),
        judge_normalized=_mean(judged) if judged else None,
        n=len(samples),
    )
