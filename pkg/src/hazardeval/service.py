"""HTTP API backing the review console: prompt engineering, single-image
assessment, dataset curation, and batch runs.

Persistence is the JSONL dataset file plus the provider replay cache; uploaded
images are stored content-addressed under the media directory. Dataset
mutations are serialized through one lock, and every mutation endpoint is
idempotent on repeated submission of the same payload. Provider credentials
never leave the process: configs carry env-var names only.
"""

from __future__ import annotations

import hashlib
import threading
from pathlib import Path

import uvicorn
from fastapi import FastAPI, File, Form, HTTPException, UploadFile
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import FileResponse
from fastapi.staticfiles import StaticFiles

from .config import AppConfig
from .guidelines import (
    GuidelineError,
    GuidelineSet,
    guideline_set_from_entries,
    guidelines_to_entries,
    load_guidelines,
)
from .harness import (
    DatasetError,
    DatasetRecord,
    DraftGateError,
    EvaluationError,
    RunConfig,
    evaluate_run,
    load_dataset,
    record_to_dict,
    run_fingerprint,
    run_models,
    save_dataset,
    table_to_dict,
)
from .judge import JudgeError
from .prompting import (
    EngineeredPrompt,
    PromptError,
    ResponseTemplate,
    SeverityScale,
    deterministic_prompt,
    engineer_prompt,
)
from .providers import (
    CachingProvider,
    ProviderError,
    build_provider,
    encode_image,
    provider_cache,
)
from .reportparse import ParseError, parse_report, report_from_dict, report_to_dict


class ServiceState:
    """Mutable server state: dataset records, prompts, finished runs."""

    def __init__(self, config: AppConfig, dataset_path: str | Path, guidelines_path: str | Path | None = None):
        self.config = config
        self.dataset_path = Path(dataset_path)
        self.records = load_dataset(self.dataset_path)
        self.write_lock = threading.Lock()
        self.prompts: dict[str, EngineeredPrompt] = {}
        self.runs: dict[str, dict] = {}
        self.template = ResponseTemplate(severity_scale=SeverityScale(*config.run.severity_scale))
        self.media_dir = Path(config.media_dir)

        cache_root = config.cache_dir
        self._cache = provider_cache(cache_root)
        self.model_specs = {spec.model_id: spec for spec in config.models}
        # raw backends feed run_models (which applies its own cache wrapping);
        # the wrapped ones serve single /api/assess calls
        self.raw_providers = {
            spec.model_id: build_provider(spec.provider, cache_root) for spec in config.models
        }
        self.providers = {
            model_id: self._wrap(provider) for model_id, provider in self.raw_providers.items()
        }
        self.embedder = self._wrap(build_provider(config.embeddings.provider, cache_root))
        self.judge_provider = (
            self._wrap(build_provider(config.judge.provider, cache_root)) if config.judge else None
        )

        self.guidelines: GuidelineSet | None = None
        if guidelines_path is not None:
            self.guidelines = load_guidelines(guidelines_path)
            prompt = deterministic_prompt(self.guidelines, self.template, config.prompts_dir)
            self.register_prompt(prompt, alias="default")

    def _wrap(self, provider):
        return CachingProvider(provider, self._cache) if self.config.run.cache else provider

    def register_prompt(self, prompt: EngineeredPrompt, alias: str | None = None) -> str:
        prompt_id = hashlib.sha256(prompt.text.encode("utf-8")).hexdigest()[:16]
        self.prompts[prompt_id] = prompt
        if alias:
            self.prompts[alias] = prompt
        return prompt_id

    def record(self, record_id: str) -> DatasetRecord:
        for rec in self.records:
            if rec.record_id == record_id:
                return rec
        raise HTTPException(status_code=404, detail=f"unknown record {record_id!r}")

    def save_records(self):
        save_dataset(self.records, self.dataset_path)


def create_app(
    config: AppConfig,
    dataset_path: str | Path,
    guidelines_path: str | Path | None = None,
    console_dir: str | Path | None = None,
) -> FastAPI:
    state = ServiceState(config, dataset_path, guidelines_path)
    app = FastAPI(title="hazardeval service")
    app.state.harness = state
    # single-operator desk tool; the console may be served from another port
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"]
    )

    @app.get("/api/health")
    def health():
        return {"status": "ok", "records": len(state.records)}

    @app.get("/api/models")
    def models():
        return [
            {"model_id": spec.model_id, "kind": spec.provider.kind}
            for spec in config.models
        ]

    @app.get("/api/guidelines")
    def get_guidelines():
        if state.guidelines is None:
            raise HTTPException(status_code=404, detail="service started without a guideline document")
        return {
            "source_label": state.guidelines.source_label,
            "guidelines": guidelines_to_entries(state.guidelines),
        }

    @app.post("/api/prompt/engineer")
    def engineer(body: dict):
        entries = body.get("guidelines")
        if entries is None:
            raise HTTPException(status_code=422, detail="body must carry a 'guidelines' array")
        try:
            gset = guideline_set_from_entries(entries, source_label=body.get("source_label", "console"))
        except GuidelineError as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from exc
        use_meta = bool(body.get("meta_prompted", False))
        try:
            if use_meta:
                spec = next(iter(config.models))
                prompt = engineer_prompt(
                    gset,
                    state.template,
                    state.providers[spec.model_id],
                    spec.params,
                    prompts_dir=config.prompts_dir,
                )
            else:
                prompt = deterministic_prompt(gset, state.template, config.prompts_dir)
        except (PromptError, ProviderError) as exc:
            raise HTTPException(status_code=502, detail=str(exc)) from exc
        prompt_id = state.register_prompt(prompt)
        return {
            "prompt_id": prompt_id,
            "text": prompt.text,
            "guideline_fingerprint": prompt.guideline_fingerprint,
            "template_fingerprint": prompt.template_fingerprint,
            "provenance": prompt.provenance,
        }

    @app.post("/api/assess")
    def assess(
        image: UploadFile = File(...),
        prompt_id: str = Form("default"),
        model_id: str = Form(...),
    ):
        prompt = state.prompts.get(prompt_id)
        if prompt is None:
            raise HTTPException(status_code=404, detail=f"unknown prompt_id {prompt_id!r}")
        spec = state.model_specs.get(model_id)
        if spec is None:
            raise HTTPException(status_code=404, detail=f"unknown model_id {model_id!r}")
        data = image.file.read()
        suffix = Path(image.filename or "upload.png").suffix.lower().lstrip(".") or "png"
        try:
            attachment = encode_image(data, "jpeg" if suffix in ("jpg", "jpeg") else suffix)
        except ValueError as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from exc
        media_path = state.media_dir / f"{attachment.content_hash}.{attachment.media_type}"
        if not media_path.exists():
            state.media_dir.mkdir(parents=True, exist_ok=True)
            media_path.write_bytes(data)
        try:
            completion = state.providers[model_id].complete(prompt.text, image=attachment, params=spec.params)
        except ProviderError as exc:
            raise HTTPException(status_code=502, detail=f"provider failed: {exc}") from exc
        try:
            parsed, issues = parse_report(completion.text, config.run.severity_scale)
        except ParseError as exc:
            raise HTTPException(status_code=502, detail=f"unparseable completion: {exc}") from exc
        return {
            "report": report_to_dict(parsed),
            "latency": completion.latency,
            "parse_issues": [
                {"kind": i.kind, "location": i.location, "message": i.message} for i in issues
            ],
            "media_ref": media_path.name,
        }

    @app.get("/api/records")
    def list_records():
        return [record_to_dict(rec) for rec in state.records]

    @app.get("/api/records/{record_id}")
    def get_record(record_id: str):
        return record_to_dict(state.record(record_id))

    @app.get("/api/records/{record_id}/image")
    def get_record_image(record_id: str):
        rec = state.record(record_id)
        if not Path(rec.image_path).is_file():
            raise HTTPException(status_code=404, detail=f"image missing for record {record_id!r}")
        return FileResponse(rec.image_path)

    @app.put("/api/records/{record_id}")
    def update_record(record_id: str, body: dict):
        with state.write_lock:
            rec = state.record(record_id)
            try:
                ground_truth = rec.ground_truth
                if "ground_truth" in body:
                    raw = body["ground_truth"]
                    ground_truth = report_from_dict(raw, config.run.severity_scale) if raw is not None else None
                updated = DatasetRecord(
                    record_id=rec.record_id,
                    image_ref=rec.image_ref,
                    ground_truth=ground_truth,
                    review_status=body.get("review_status", rec.review_status),
                    failure_labels=frozenset(body.get("failure_labels", sorted(rec.failure_labels))),
                    image_path=rec.image_path,
                )
            except (DatasetError, ParseError) as exc:
                raise HTTPException(status_code=422, detail=str(exc)) from exc
            state.records = [updated if r.record_id == record_id else r for r in state.records]
            state.save_records()
        return record_to_dict(updated)

    @app.post("/api/runs")
    def start_run(body: dict | None = None):
        body = body or {}
        prompt = state.prompts.get(body.get("prompt_id", "default"))
        if prompt is None:
            raise HTTPException(status_code=404, detail="unknown prompt_id; engineer a prompt first")
        model_ids = body.get("model_ids") or list(state.model_specs)
        unknown = [m for m in model_ids if m not in state.model_specs]
        if unknown:
            raise HTTPException(status_code=404, detail=f"unknown model ids {unknown}")
        try:
            run_config = RunConfig(
                models=[state.model_specs[m] for m in model_ids],
                prompt=prompt,
                concurrency=int(body.get("concurrency", config.run.concurrency)),
                cache=bool(body.get("cache", config.run.cache)),
                tracks=tuple(body.get("tracks", config.run.tracks)),
                judge=config.judge if body.get("judge", True) else None,
                severity_scale=config.run.severity_scale,
            )
        except (TypeError, ValueError) as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from exc
        run_id = run_fingerprint(run_config, state.records)
        if run_id in state.runs:
            return {"run_id": run_id, "status": "done", "cached": True}
        try:
            results = run_models(
                run_config,
                state.records,
                providers={m: state.raw_providers[m] for m in model_ids},
                cache_dir=config.cache_dir,
            )
            table = evaluate_run(
                run_config,
                results,
                state.records,
                state.embedder,
                judge_provider=state.judge_provider,
                sentence_model=config.embeddings.sentence_model,
                token_model=config.embeddings.token_model,
            )
        except DraftGateError as exc:
            raise HTTPException(
                status_code=409,
                detail={"message": str(exc), "draft_ids": exc.draft_ids},
            ) from exc
        except (EvaluationError, JudgeError, ProviderError) as exc:
            raise HTTPException(status_code=502, detail=str(exc)) from exc
        state.runs[run_id] = table_to_dict(table)
        return {"run_id": run_id, "status": "done", "cached": False}

    @app.get("/api/runs/{run_id}")
    def get_run(run_id: str):
        table = state.runs.get(run_id)
        if table is None:
            raise HTTPException(status_code=404, detail=f"unknown run {run_id!r}")
        return table

    if console_dir is not None and Path(console_dir).is_dir():
        app.mount("/", StaticFiles(directory=console_dir, html=True), name="console")

    return app


def serve(
    config: AppConfig,
    dataset_path: str | Path,
    host: str = "127.0.0.1",
    port: int = 8787,
    guidelines_path: str | Path | None = None,
    console_dir: str | Path | None = None,
):
    """Run the service until interrupted (uvicorn handles signals)."""
    app = create_app(config, dataset_path, guidelines_path, console_dir)
    uvicorn.run(app, host=host, port=port, log_level="info")
