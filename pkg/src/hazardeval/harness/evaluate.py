"""Score run results against ground truth on both comparison tracks.

The hazard-detection track compares hazard slices (summary + hazard names);
the overall track compares full canonical reports. Cosine similarity uses
sentence embeddings, precision/recall/F1 use token embeddings, and the overall
track optionally adds the blind judge. Evaluation refuses datasets containing
draft records: only human-approved ground truth is comparable.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

from ..judge import JudgeError, judge_sample
from ..metrics import (
    SampleScores,
    ScoreRow,
    TRACK_HAZARD_DETECTION,
    TRACK_OVERALL,
    aggregate,
    bertscore,
    cosine_similarity,
)
from ..providers import ProviderError
from ..reportparse import canonicalize, hazard_slice
from .dataset import DatasetRecord, STATUS_APPROVED
from .run import RunConfig, RunResult, run_fingerprint

logger = logging.getLogger(__name__)


class EvaluationError(ValueError):
    pass


class DraftGateError(EvaluationError):
    """Evaluation attempted over a dataset still containing draft records."""

    def __init__(self, draft_ids: list[str]):
        self.draft_ids = list(draft_ids)
        ids = ", ".join(self.draft_ids)
        super().__init__(f"dataset contains unapproved draft records: {ids}")


@dataclass(frozen=True)
class LatencyRow:
    model_id: str
    mean: float
    p50: float
    p95: float
    n: int


@dataclass(frozen=True)
class EvalTable:
    rows: tuple[ScoreRow, ...]
    latency_rows: tuple[LatencyRow, ...]
    run_fingerprint: str


def _track_text(report, track: str) -> str:
    return hazard_slice(report) if track == TRACK_HAZARD_DETECTION else canonicalize(report)


def evaluate_run(
    config: RunConfig,
    results: list[RunResult],
    records: list[DatasetRecord],
    embedder,
    judge_provider=None,
    sentence_model: str = "paraphrase-MiniLM-L12-v2",
    token_model: str = "roberta-large",
) -> EvalTable:
    """Aggregate per-sample metrics into one ScoreRow per (model, track).

    Failed samples are excluded (row n shows it); judge failures only drop the
    judge value for that sample. Embedding failures abort: no metric here is
    meaningful without embeddings.
    """
    drafts = [r.record_id for r in records if r.review_status != STATUS_APPROVED]
    if drafts:
        raise DraftGateError(drafts)
    by_id = {r.record_id: r for r in records}
    missing = sorted({res.record_id for res in results if res.record_id not in by_id})
    if missing:
        raise EvaluationError(f"results reference unknown record ids: {missing}")
    if judge_provider is None and config.judge is not None:
        from ..providers import build_provider

        judge_provider = build_provider(config.judge.provider)

    rows: list[ScoreRow] = []
    for spec in config.models:
        model_results = [res for res in results if res.model_id == spec.model_id]
        usable = [res for res in model_results if res.ok]
        skipped = len(model_results) - len(usable)
        if skipped:
            logger.warning("model %s: excluding %d failed samples", spec.model_id, skipped)
        if not usable:
            raise EvaluationError(f"model {spec.model_id} produced no usable samples")
        for track in config.tracks:
            samples = []
            for res in usable:
                ground_truth = by_id[res.record_id].ground_truth
                pred_text = _track_text(res.parsed, track)
                gt_text = _track_text(ground_truth, track)
                vec_pred, vec_gt = embedder.embed_sentence([pred_text, gt_text], sentence_model)
                score = bertscore(
                    embedder.embed_tokens(pred_text, token_model),
                    embedder.embed_tokens(gt_text, token_model),
                )
                judge_value = None
                if track == TRACK_OVERALL and config.judge is not None and judge_provider is not None:
                    try:
                        judge_value = judge_sample(
                            judge_provider,
                            config.judge.params,
                            canonicalize(res.parsed),
                            canonicalize(ground_truth),
                        )
                    except (JudgeError, ProviderError) as exc:
                        logger.warning(
                            "judge failed for record %s, model %s; sample excluded from judge mean: %s",
                            res.record_id,
                            spec.model_id,
                            exc,
                        )
                samples.append(
                    SampleScores(
                        cosine=cosine_similarity(vec_pred, vec_gt),
                        bert_precision=score.precision,
                        bert_recall=score.recall,
                        bert_f1=score.f1,
                        judge_normalized=judge_value,
                    )
                )
            rows.append(aggregate(samples, spec.model_id, track))

    return EvalTable(
        rows=tuple(rows),
        latency_rows=tuple(bench_latency(results)),
        run_fingerprint=run_fingerprint(config, records),
    )


def bench_latency(results: list[RunResult]) -> list[LatencyRow]:
    """Per-model mean/p50/p95 of completion latency over successful samples."""
    if not results:
        raise EvaluationError("no results to benchmark")
    order: list[str] = []
    grouped: dict[str, list[float]] = {}
    for res in results:
        if not res.ok:
            continue
        if res.model_id not in grouped:
            grouped[res.model_id] = []
            order.append(res.model_id)
        grouped[res.model_id].append(res.completion.latency)
    rows = []
    for model_id in order:
        latencies = grouped[model_id]
        rows.append(
            LatencyRow(
                model_id=model_id,
                mean=math.fsum(latencies) / len(latencies),
                p50=float(np.percentile(latencies, 50)),
                p95=float(np.percentile(latencies, 95)),
                n=len(latencies),
            )
        )
    return rows
