"""Reusable pieces for golden-run tests and the golden refresh script."""

from __future__ import annotations

from pathlib import Path

from hazardeval.config import AppConfig
from hazardeval.guidelines import load_guidelines
from hazardeval.harness import RunConfig, emit_report, evaluate_run, load_dataset, run_models
from hazardeval.prompting import ResponseTemplate, deterministic_prompt
from hazardeval.providers import CachingProvider, FLAVOR_JUDGE, StubProvider, provider_cache

REPO = Path(__file__).resolve().parents[1]
GOLDEN_DIR = REPO / "tests" / "golden"
GOLDEN_FILES = {"json": "report.json", "csv": "report.csv", "markdown": "report.md"}


def golden_pipeline(cache_dir: Path, out_dir: Path) -> tuple[dict[str, Path], int]:
    """The stock offline benchmark: fixture dataset, two stub models, both
    tracks, stub embeddings, stub judge, caching on.

    Returns the emitted report paths and the total number of stub provider
    invocations made during this call (0 when everything came from cache).
    """
    config = AppConfig.default_offline()
    records = load_dataset(REPO / "fixtures" / "dataset.jsonl")
    guidelines = load_guidelines(REPO / "fixtures" / "guidelines_table1.json")
    prompt = deterministic_prompt(guidelines, ResponseTemplate(), REPO / "prompts")

    run_config = RunConfig(
        models=config.models,
        prompt=prompt,
        concurrency=2,
        cache=True,
        judge=config.judge,
    )
    stubs = {spec.model_id: StubProvider() for spec in config.models}
    embedder = StubProvider()
    judge = StubProvider(flavor=FLAVOR_JUDGE)
    cache = provider_cache(cache_dir)

    results = run_models(run_config, records, providers=stubs, cache_dir=cache_dir)
    table = evaluate_run(
        run_config,
        results,
        records,
        CachingProvider(embedder, cache),
        judge_provider=CachingProvider(judge, cache),
    )
    paths = emit_report(table, ["json", "csv", "markdown"], out_dir)
    calls = sum(s.total_calls for s in stubs.values()) + embedder.total_calls + judge.total_calls
    return paths, calls
