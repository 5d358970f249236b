"""Batch execution of one engineered prompt across models and dataset records.

Work is fanned out over a bounded thread pool; results come back in a fixed
(model, record) order regardless of scheduling, so stub/replay runs are fully
deterministic. Per-sample failures are captured on the result instead of
aborting the run.
"""

from __future__ import annotations

import hashlib
import json
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from ..prompting import EngineeredPrompt
from ..providers import (
    CachingProvider,
    CompletionResult,
    GenerationParams,
    ProviderConfig,
    ProviderError,
    TokenUsage,
    build_provider,
    encode_image,
    media_type_for,
    provider_cache,
)
from ..reportparse import (
    HazardReport,
    ParseError,
    ParseIssue,
    parse_report,
    report_from_dict,
    report_to_dict,
)
from ..metrics import TRACKS
from .dataset import STATUS_DRAFT, DatasetRecord

logger = logging.getLogger(__name__)


class RunError(ValueError):
    pass


@dataclass(frozen=True)
class ModelSpec:
    """One model under test: where to reach it and how to sample it."""

    provider: ProviderConfig
    params: GenerationParams

    @property
    def model_id(self) -> str:
        return self.params.model_id


@dataclass(frozen=True)
class JudgeSpec:
    provider: ProviderConfig
    params: GenerationParams


@dataclass(frozen=True)
class EmbeddingSpec:
    provider: ProviderConfig
    sentence_model: str = "paraphrase-MiniLM-L12-v2"
    token_model: str = "roberta-large"


@dataclass
class RunConfig:
    models: list[ModelSpec]
    prompt: EngineeredPrompt
    concurrency: int = 1
    cache: bool = True
    tracks: tuple[str, ...] = TRACKS
    judge: JudgeSpec | None = None
    severity_scale: tuple[int, int] = (1, 10)

    def __post_init__(self):
        if not self.models:
            raise RunError("run config needs at least one model")
        if self.concurrency < 1:
            raise RunError(f"concurrency must be >= 1, got {self.concurrency}")
        unknown = [t for t in self.tracks if t not in TRACKS]
        if unknown:
            raise RunError(f"unknown tracks {unknown}; expected subset of {list(TRACKS)}")
        if not self.tracks:
            raise RunError("run config needs at least one track")
        ids = [spec.model_id for spec in self.models]
        if len(set(ids)) != len(ids):
            raise RunError(f"duplicate model ids in run config: {ids}")


@dataclass
class RunResult:
    record_id: str
    model_id: str
    completion: CompletionResult
    parsed: HazardReport
    parse_issues: list[ParseIssue] = field(default_factory=list)
    error: str | None = None

    @property
    def ok(self) -> bool:
        return self.error is None


def run_fingerprint(config: RunConfig, records: list[DatasetRecord]) -> str:
    """Digest of what was run on what: models, prompt, tracks, record ids."""
    payload = {
        "models": [
            {
                "kind": spec.provider.kind,
                "base_url": spec.provider.base_url,
                "model_id": spec.params.model_id,
                "temperature": spec.params.temperature,
                "max_tokens": spec.params.max_tokens,
            }
            for spec in config.models
        ],
        "prompt_digest": hashlib.sha256(config.prompt.text.encode("utf-8")).hexdigest(),
        "guideline_fingerprint": config.prompt.guideline_fingerprint,
        "template_fingerprint": config.prompt.template_fingerprint,
        "tracks": list(config.tracks),
        "records": [r.record_id for r in records],
    }
    canonical = json.dumps(payload, ensure_ascii=False, separators=(",", ":"), sort_keys=True)
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def _wrap_cached(provider, config: RunConfig, cache_dir):
    if not config.cache:
        return provider
    return CachingProvider(provider, provider_cache(cache_dir))


def build_run_providers(config: RunConfig, cache_dir=None, providers=None) -> dict:
    """Providers per model id, cache-wrapped when the config enables caching.

    `providers` may inject pre-built backends (tests pass stubs here); they are
    still cache-wrapped so cached reruns bypass them entirely.
    """
    built = {}
    for spec in config.models:
        inner = providers[spec.model_id] if providers else build_provider(spec.provider, cache_dir)
        built[spec.model_id] = _wrap_cached(inner, config, cache_dir)
    return built


def _load_attachment(record: DatasetRecord):
    data = Path(record.image_path).read_bytes()
    return encode_image(data, media_type_for(record.image_path))


_EMPTY = HazardReport(summary="", hazards=(), raw_text="")


def _assess_one(provider, prompt_text: str, record: DatasetRecord, spec: ModelSpec, scale) -> RunResult:
    try:
        image = _load_attachment(record)
    except (OSError, ValueError) as exc:
        return RunResult(
            record_id=record.record_id,
            model_id=spec.model_id,
            completion=CompletionResult(text="", latency=0.0),
            parsed=_EMPTY,
            error=f"image load failed: {exc}",
        )
    try:
        completion = provider.complete(prompt_text, image=image, params=spec.params)
    except ProviderError as exc:
        return RunResult(
            record_id=record.record_id,
            model_id=spec.model_id,
            completion=CompletionResult(text="", latency=0.0),
            parsed=_EMPTY,
            error=f"provider failed: {exc}",
        )
    try:
        parsed, issues = parse_report(completion.text, scale)
    except ParseError as exc:
        return RunResult(
            record_id=record.record_id,
            model_id=spec.model_id,
            completion=completion,
            parsed=HazardReport(summary="", hazards=(), raw_text=completion.text),
            parse_issues=[],
            error=f"unparseable completion: {exc}",
        )
    return RunResult(
        record_id=record.record_id,
        model_id=spec.model_id,
        completion=completion,
        parsed=parsed,
        parse_issues=issues,
    )


def run_models(
    config: RunConfig,
    records: list[DatasetRecord],
    providers: dict | None = None,
    cache_dir=None,
) -> list[RunResult]:
    """One RunResult per (model, record), in config-model then record order."""
    if not records:
        raise RunError("no records to run")
    backends = build_run_providers(config, cache_dir=cache_dir, providers=providers)
    tasks = [(spec, record) for spec in config.models for record in records]

    def work(task):
        spec, record = task
        return _assess_one(backends[spec.model_id], config.prompt.text, record, spec, config.severity_scale)

    with ThreadPoolExecutor(max_workers=config.concurrency) as pool:
        results = list(pool.map(work, tasks))
    failed = [r for r in results if not r.ok]
    if failed:
        logger.warning("%d/%d samples failed", len(failed), len(results))
    return results


def bootstrap_ground_truth(
    records: list[DatasetRecord],
    provider,
    prompt: EngineeredPrompt,
    params: GenerationParams = GenerationParams(),
    scale: tuple[int, int] = (1, 10),
) -> tuple[list[DatasetRecord], list[tuple[str, str]]]:
    """Draft ground truth for records that have none; humans approve later.

    Returns the updated records plus (record_id, message) pairs for records
    left draft-empty by provider or parse failures.
    """
    updated: list[DatasetRecord] = []
    issues: list[tuple[str, str]] = []
    for record in records:
        if record.ground_truth is not None:
            updated.append(record)
            continue
        try:
            image = _load_attachment(record)
            completion = provider.complete(prompt.text, image=image, params=params)
            parsed, _ = parse_report(completion.text, scale)
        except (OSError, ValueError, ProviderError, ParseError) as exc:
            issues.append((record.record_id, str(exc)))
            updated.append(record)
            continue
        updated.append(
            DatasetRecord(
                record_id=record.record_id,
                image_ref=record.image_ref,
                ground_truth=parsed,
                review_status=STATUS_DRAFT,
                failure_labels=record.failure_labels,
                image_path=record.image_path,
            )
        )
    return updated, issues


# -- result persistence for the two-phase CLI flow --------------------------


def save_results(results: list[RunResult], path: str | Path):
    path = Path(path)
    lines = []
    for r in results:
        usage = None
        if r.completion.token_usage is not None:
            usage = {"prompt": r.completion.token_usage.prompt, "completion": r.completion.token_usage.completion}
        lines.append(
            json.dumps(
                {
                    "record_id": r.record_id,
                    "model_id": r.model_id,
                    "text": r.completion.text,
                    "latency": r.completion.latency,
                    "token_usage": usage,
                    "parsed": report_to_dict(r.parsed),
                    "parse_issues": [
                        {"kind": i.kind, "location": i.location, "message": i.message} for i in r.parse_issues
                    ],
                    "error": r.error,
                },
                ensure_ascii=False,
            )
        )
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def load_results(path: str | Path) -> list[RunResult]:
    path = Path(path)
    results = []
    for line_no, line in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1):
        if not line.strip():
            continue
        try:
            payload = json.loads(line)
            usage = payload.get("token_usage")
            results.append(
                RunResult(
                    record_id=payload["record_id"],
                    model_id=payload["model_id"],
                    completion=CompletionResult(
                        text=payload["text"],
                        latency=payload["latency"],
                        token_usage=TokenUsage(**usage) if usage else None,
                    ),
                    parsed=report_from_dict(payload["parsed"]),
                    parse_issues=[ParseIssue(**issue) for issue in payload.get("parse_issues", [])],
                    error=payload.get("error"),
                )
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise RunError(f"{path} line {line_no}: bad result entry: {exc}") from exc
    if not results:
        raise RunError(f"{path}: no results")
    return results
