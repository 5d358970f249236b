"""Command-line entry points for the assessment pipeline.

Subcommands: engineer-prompt, assess, bootstrap-gt, run, evaluate, bench,
report, serve. Global flags pick the config file, the cache directory, and
--offline mode (stub/replay providers only). Without --config a fully offline
stub setup is used, which is enough to exercise the whole pipeline.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .config import AppConfig, ConfigError, load_app_config
from .guidelines import GuidelineError, load_guidelines
from .harness import (
    DatasetError,
    DraftGateError,
    EvaluationError,
    RunConfig,
    RunError,
    bench_latency,
    bootstrap_ground_truth,
    emit_report,
    evaluate_run,
    load_dataset,
    load_results,
    render_markdown,
    run_fingerprint,
    run_models,
    save_dataset,
    save_results,
    table_from_dict,
    table_to_dict,
)
from .harness.evaluate import EvalTable
from .prompting import (
    EngineeredPrompt,
    PromptError,
    ResponseTemplate,
    SeverityScale,
    deterministic_prompt,
    engineer_prompt,
)
from .providers import ProviderError, build_provider, encode_image, media_type_for
from .reportparse import ParseError, parse_report, report_to_dict


def default_guidelines_path() -> Path:
    """The shipped taxonomy: repo checkout first, then cwd-relative."""
    repo_copy = Path(__file__).resolve().parents[2] / "fixtures" / "guidelines_table1.json"
    if repo_copy.is_file():
        return repo_copy
    return Path("fixtures/guidelines_table1.json")


DEFAULT_GUIDELINES = default_guidelines_path()

_ERRORS = (
    ConfigError,
    DatasetError,
    DraftGateError,
    EvaluationError,
    GuidelineError,
    PromptError,
    ProviderError,
    ParseError,
    RunError,
    OSError,
    ValueError,
)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hazardeval", description=__doc__)
    parser.add_argument("--config", type=Path, help="JSON config file (default: built-in stub setup)")
    parser.add_argument("--cache-dir", type=Path, help="override the provider cache directory")
    parser.add_argument("--offline", action="store_true", help="refuse network provider kinds")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("engineer-prompt", help="compile guidelines into an inference prompt")
    p.add_argument("--guidelines", type=Path, default=DEFAULT_GUIDELINES)
    p.add_argument("--meta", action="store_true", help="ask the first configured model to write the prompt")
    p.add_argument("--out", type=Path, help="write the engineered prompt JSON here")
    p.set_defaults(func=cmd_engineer_prompt)

    p = sub.add_parser("assess", help="assess a single image")
    p.add_argument("image", type=Path)
    p.add_argument("--model", help="model id from the config (default: first)")
    p.add_argument("--guidelines", type=Path, default=DEFAULT_GUIDELINES)
    p.add_argument("--prompt-file", type=Path, help="engineered prompt JSON from engineer-prompt --out")
    p.set_defaults(func=cmd_assess)

    p = sub.add_parser("bootstrap-gt", help="draft ground truth for records lacking it")
    p.add_argument("--dataset", type=Path, required=True)
    p.add_argument("--model", help="model id to draft with (default: first)")
    p.add_argument("--guidelines", type=Path, default=DEFAULT_GUIDELINES)
    p.add_argument("--prompt-file", type=Path)
    p.set_defaults(func=cmd_bootstrap_gt)

    p = sub.add_parser("run", help="run every configured model over a dataset")
    p.add_argument("--dataset", type=Path, required=True)
    p.add_argument("--guidelines", type=Path, default=DEFAULT_GUIDELINES)
    p.add_argument("--prompt-file", type=Path)
    p.add_argument("--out-dir", type=Path, help="default: runs/<fingerprint prefix>")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("evaluate", help="score saved run results against ground truth")
    p.add_argument("--dataset", type=Path, required=True)
    p.add_argument("--results", type=Path, required=True)
    p.add_argument("--guidelines", type=Path, default=DEFAULT_GUIDELINES)
    p.add_argument("--prompt-file", type=Path)
    p.add_argument("--out", type=Path, help="write the eval table JSON here (default: stdout)")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("bench", help="latency summary of saved run results")
    p.add_argument("--results", type=Path, required=True)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("report", help="emit JSON/CSV/Markdown reports from an eval table")
    p.add_argument("--table", type=Path, required=True)
    p.add_argument("--formats", default="json,csv,markdown")
    p.add_argument("--out-dir", type=Path, required=True)
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("serve", help="start the review-console HTTP service")
    p.add_argument("--dataset", type=Path, required=True)
    p.add_argument("--guidelines", type=Path, default=DEFAULT_GUIDELINES)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8787)
    p.add_argument("--console-dir", type=Path, help="serve a built console bundle at /")
    p.set_defaults(func=cmd_serve)

    return parser


def _load_config(args) -> AppConfig:
    config = load_app_config(args.config) if args.config else AppConfig.default_offline()
    if args.cache_dir:
        config.cache_dir = args.cache_dir
    if args.offline:
        config.require_offline()
    return config


def _template(config: AppConfig) -> ResponseTemplate:
    return ResponseTemplate(severity_scale=SeverityScale(*config.run.severity_scale))


def _prompt_for(args, config: AppConfig) -> EngineeredPrompt:
    if getattr(args, "prompt_file", None):
        payload = json.loads(args.prompt_file.read_text(encoding="utf-8"))
        return EngineeredPrompt(
            text=payload["text"],
            guideline_fingerprint=payload["guideline_fingerprint"],
            template_fingerprint=payload["template_fingerprint"],
            provenance=payload["provenance"],
        )
    gset = load_guidelines(args.guidelines)
    return deterministic_prompt(gset, _template(config), config.prompts_dir)


def _model_spec(config: AppConfig, model_id: str | None):
    if model_id is None:
        return config.models[0]
    for spec in config.models:
        if spec.model_id == model_id:
            return spec
    raise ConfigError(f"model {model_id!r} not in config (have {[s.model_id for s in config.models]})")


def _prompt_payload(prompt: EngineeredPrompt) -> dict:
    return {
        "text": prompt.text,
        "guideline_fingerprint": prompt.guideline_fingerprint,
        "template_fingerprint": prompt.template_fingerprint,
        "provenance": prompt.provenance,
    }


def cmd_engineer_prompt(args, config: AppConfig) -> int:
    gset = load_guidelines(args.guidelines)
    template = _template(config)
    if args.meta:
        spec = config.models[0]
        provider = build_provider(spec.provider, config.cache_dir)
        prompt = engineer_prompt(gset, template, provider, spec.params, prompts_dir=config.prompts_dir)
    else:
        prompt = deterministic_prompt(gset, template, config.prompts_dir)
    payload = json.dumps(_prompt_payload(prompt), ensure_ascii=False, indent=2) + "\n"
    if args.out:
        args.out.write_text(payload, encoding="utf-8")
        print(f"wrote {args.out}")
    else:
        print(payload, end="")
    return 0


def cmd_assess(args, config: AppConfig) -> int:
    spec = _model_spec(config, args.model)
    prompt = _prompt_for(args, config)
    provider = build_provider(spec.provider, config.cache_dir)
    image = encode_image(args.image.read_bytes(), media_type_for(args.image))
    completion = provider.complete(prompt.text, image=image, params=spec.params)
    parsed, issues = parse_report(completion.text, config.run.severity_scale)
    print(
        json.dumps(
            {
                "model_id": spec.model_id,
                "latency": completion.latency,
                "report": report_to_dict(parsed),
                "parse_issues": [
                    {"kind": i.kind, "location": i.location, "message": i.message} for i in issues
                ],
            },
            ensure_ascii=False,
            indent=2,
        )
    )
    return 0


def cmd_bootstrap_gt(args, config: AppConfig) -> int:
    records = load_dataset(args.dataset)
    spec = _model_spec(config, args.model)
    provider = build_provider(spec.provider, config.cache_dir)
    prompt = _prompt_for(args, config)
    updated, issues = bootstrap_ground_truth(
        records, provider, prompt, spec.params, config.run.severity_scale
    )
    save_dataset(updated, args.dataset)
    drafted = sum(
        1 for before, after in zip(records, updated)
        if before.ground_truth is None and after.ground_truth is not None
    )
    print(f"drafted ground truth for {drafted} records -> {args.dataset}")
    for record_id, message in issues:
        print(f"  left draft-empty: {record_id}: {message}", file=sys.stderr)
    return 0


def _run_config(args, config: AppConfig) -> RunConfig:
    return RunConfig(
        models=list(config.models),
        prompt=_prompt_for(args, config),
        concurrency=config.run.concurrency,
        cache=config.run.cache,
        tracks=config.run.tracks,
        judge=config.judge,
        severity_scale=config.run.severity_scale,
    )


def cmd_run(args, config: AppConfig) -> int:
    records = load_dataset(args.dataset)
    run_config = _run_config(args, config)
    results = run_models(run_config, records, cache_dir=config.cache_dir)
    fingerprint = run_fingerprint(run_config, records)
    out_dir = args.out_dir or Path("runs") / fingerprint[:12]
    out_dir.mkdir(parents=True, exist_ok=True)
    results_path = out_dir / "results.jsonl"
    save_results(results, results_path)
    failed = [r for r in results if not r.ok]
    print(f"{len(results)} samples ({len(failed)} failed) -> {results_path}")
    print(f"run fingerprint: {fingerprint}")
    return 0


def cmd_evaluate(args, config: AppConfig) -> int:
    records = load_dataset(args.dataset)
    results = load_results(args.results)
    run_config = _run_config(args, config)
    embedder = build_provider(config.embeddings.provider, config.cache_dir)
    judge_provider = build_provider(config.judge.provider, config.cache_dir) if config.judge else None
    table = evaluate_run(
        run_config,
        results,
        records,
        embedder,
        judge_provider=judge_provider,
        sentence_model=config.embeddings.sentence_model,
        token_model=config.embeddings.token_model,
    )
    payload = json.dumps(table_to_dict(table), ensure_ascii=False, indent=2) + "\n"
    if args.out:
        args.out.write_text(payload, encoding="utf-8")
        print(f"wrote {args.out}")
    else:
        print(payload, end="")
    return 0


def cmd_bench(args, config: AppConfig) -> int:
    results = load_results(args.results)
    rows = bench_latency(results)
    print("| Model | Mean (s) | p50 (s) | p95 (s) | n |")
    print("|---|---|---|---|---|")
    for row in rows:
        print(f"| {row.model_id} | {row.mean:.2f} | {row.p50:.2f} | {row.p95:.2f} | {row.n} |")
    return 0


def cmd_report(args, config: AppConfig) -> int:
    payload = json.loads(args.table.read_text(encoding="utf-8"))
    table: EvalTable = table_from_dict(payload)
    formats = [f.strip() for f in args.formats.split(",") if f.strip()]
    written = emit_report(table, formats, args.out_dir)
    for fmt, path in written.items():
        print(f"{fmt}: {path}")
    if "markdown" in written:
        print()
        print(render_markdown(table), end="")
    return 0


def cmd_serve(args, config: AppConfig) -> int:
    from .service import serve

    serve(
        config,
        args.dataset,
        host=args.host,
        port=args.port,
        guidelines_path=args.guidelines if args.guidelines.exists() else None,
        console_dir=args.console_dir,
    )
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = _load_config(args)
        return args.func(args, config)
    except _ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
