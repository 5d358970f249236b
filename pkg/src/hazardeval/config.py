"""Application config file: providers, models under test, embeddings, judge.

The file is JSON with named provider entries that model/embedding/judge
sections reference. `configs/offline.json` ships a fully offline stub setup;
`configs/live_example.json` shows the live-provider shape. The --offline flag
rejects any config that references a network-going provider kind.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from .harness.run import EmbeddingSpec, JudgeSpec, ModelSpec
from .metrics import TRACKS
from .providers import (
    GenerationParams,
    KIND_REPLAY,
    KIND_STUB,
    ProviderConfig,
    RetryPolicy,
)

OFFLINE_KINDS = (KIND_STUB, KIND_REPLAY)


class ConfigError(ValueError):
    pass


@dataclass
class RunSettings:
    concurrency: int = 2
    cache: bool = True
    tracks: tuple[str, ...] = TRACKS
    severity_scale: tuple[int, int] = (1, 10)


@dataclass
class AppConfig:
    providers: dict[str, ProviderConfig]
    models: list[ModelSpec]
    embeddings: EmbeddingSpec
    judge: JudgeSpec | None = None
    run: RunSettings = field(default_factory=RunSettings)
    prompts_dir: Path | None = None
    cache_dir: Path = Path(".cache")
    media_dir: Path = Path(".media")

    def require_offline(self):
        """Refuse any provider that would leave the machine."""
        online = sorted(
            name for name, cfg in self.providers.items() if cfg.kind not in OFFLINE_KINDS
        )
        if online:
            raise ConfigError(
                f"--offline given but providers {online} use network kinds; "
                f"switch them to one of {list(OFFLINE_KINDS)}"
            )

    @classmethod
    def default_offline(cls) -> "AppConfig":
        """Stub-everything config used when no --config file is given."""
        stub = ProviderConfig(kind=KIND_STUB)
        judge_stub = ProviderConfig(kind=KIND_STUB, base_url="stub://judge")
        return cls(
            providers={"stub": stub, "stub-judge": judge_stub},
            models=[
                ModelSpec(provider=stub, params=GenerationParams(model_id="stub-vlm-a")),
                ModelSpec(provider=stub, params=GenerationParams(model_id="stub-vlm-b")),
            ],
            embeddings=EmbeddingSpec(provider=stub),
            judge=JudgeSpec(provider=judge_stub, params=GenerationParams(temperature=0.0, model_id="stub-judge")),
        )


def _provider_from_dict(name: str, payload: dict) -> ProviderConfig:
    if not isinstance(payload, dict):
        raise ConfigError(f"provider {name!r} must be an object")
    retry_payload = payload.get("retry", {})
    try:
        retry = RetryPolicy(
            max_attempts=retry_payload.get("max_attempts", 3),
            base_backoff=retry_payload.get("base_backoff", 0.5),
        )
        return ProviderConfig(
            kind=payload.get("kind", ""),
            base_url=payload.get("base_url", ""),
            credential_ref=payload.get("credential_ref", ""),
            timeout=payload.get("timeout", 60.0),
            retry=retry,
            rate_limit=payload.get("rate_limit", 60.0),
        )
    except ValueError as exc:
        raise ConfigError(f"provider {name!r}: {exc}") from exc


def _params_from_dict(payload: dict, context: str) -> GenerationParams:
    try:
        return GenerationParams(
            temperature=payload.get("temperature", 0.3),
            max_tokens=payload.get("max_tokens", 250),
            model_id=payload.get("model_id", ""),
        )
    except ValueError as exc:
        raise ConfigError(f"{context}: {exc}") from exc


def load_app_config(path: str | Path) -> AppConfig:
    path = Path(path)
    try:
        payload = json.loads(path.read_text(encoding="utf-8"))
    except FileNotFoundError as exc:
        raise ConfigError(f"config file not found: {path}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: not valid JSON: {exc}") from exc
    if not isinstance(payload, dict):
        raise ConfigError(f"{path}: config must be a JSON object")

    providers = {
        name: _provider_from_dict(name, entry)
        for name, entry in payload.get("providers", {}).items()
    }

    def lookup(name: str, context: str) -> ProviderConfig:
        try:
            return providers[name]
        except KeyError:
            raise ConfigError(f"{context} references unknown provider {name!r}") from None

    models = []
    for i, entry in enumerate(payload.get("models", [])):
        context = f"models[{i}]"
        if not isinstance(entry, dict) or "provider" not in entry:
            raise ConfigError(f"{context}: needs a provider reference")
        params = _params_from_dict(entry, context)
        if not params.model_id:
            raise ConfigError(f"{context}: model_id is required")
        models.append(ModelSpec(provider=lookup(entry["provider"], context), params=params))
    if not models:
        raise ConfigError(f"{path}: at least one model is required")

    embed_payload = payload.get("embeddings")
    if not isinstance(embed_payload, dict) or "provider" not in embed_payload:
        raise ConfigError(f"{path}: an embeddings section with a provider is required")
    embeddings = EmbeddingSpec(
        provider=lookup(embed_payload["provider"], "embeddings"),
        sentence_model=embed_payload.get("sentence_model", EmbeddingSpec.sentence_model),
        token_model=embed_payload.get("token_model", EmbeddingSpec.token_model),
    )

    judge = None
    judge_payload = payload.get("judge")
    if judge_payload is not None:
        if not isinstance(judge_payload, dict) or "provider" not in judge_payload:
            raise ConfigError(f"{path}: judge section needs a provider reference")
        judge = JudgeSpec(
            provider=lookup(judge_payload["provider"], "judge"),
            params=_params_from_dict(judge_payload, "judge"),
        )

    run_payload = payload.get("run", {})
    tracks = tuple(run_payload.get("tracks", TRACKS))
    unknown_tracks = [t for t in tracks if t not in TRACKS]
    if unknown_tracks:
        raise ConfigError(f"{path}: unknown tracks {unknown_tracks}")
    scale = run_payload.get("severity_scale", [1, 10])
    if not (isinstance(scale, list) and len(scale) == 2 and all(isinstance(v, int) for v in scale)):
        raise ConfigError(f"{path}: severity_scale must be [low, high]")
    run = RunSettings(
        concurrency=run_payload.get("concurrency", 2),
        cache=run_payload.get("cache", True),
        tracks=tracks,
        severity_scale=(scale[0], scale[1]),
    )
    if run.concurrency < 1:
        raise ConfigError(f"{path}: concurrency must be >= 1")

    prompts_dir = payload.get("prompts_dir")
    return AppConfig(
        providers=providers,
        models=models,
        embeddings=embeddings,
        judge=judge,
        run=run,
        prompts_dir=Path(prompts_dir) if prompts_dir else None,
        cache_dir=Path(payload.get("cache_dir", ".cache")),
        media_dir=Path(payload.get("media_dir", ".media")),
    )
