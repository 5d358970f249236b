import json

import numpy as np
import pytest

from hazardeval.config import AppConfig
from hazardeval.guidelines import load_guidelines
from hazardeval.harness import (
    DatasetError,
    DraftGateError,
    EvaluationError,
    RunConfig,
    bench_latency,
    bootstrap_ground_truth,
    emit_report,
    evaluate_run,
    load_dataset,
    load_results,
    run_fingerprint,
    run_models,
    save_dataset,
    save_results,
    table_from_dict,
    table_to_dict,
)
from hazardeval.harness.evaluate import EvalTable, LatencyRow
from hazardeval.metrics import ScoreRow, TRACK_HAZARD_DETECTION, TRACK_OVERALL
from hazardeval.prompting import ResponseTemplate, deterministic_prompt
from hazardeval.providers import (
    CompletionResult,
    FLAVOR_JUDGE,
    GenerationParams,
    ProviderConfig,
    ProviderError,
    StubProvider,
    encode_image,
)
from hazardeval.reportparse import canonicalize, hazard_slice, parse_report

from conftest import simple_ground_truth
from test_metrics import brute_force_bertscore

STUB = ProviderConfig(kind="stub")


def two_model_config(prompt, **kwargs):
    from hazardeval.harness import JudgeSpec, ModelSpec

    defaults = dict(
        models=[
            ModelSpec(provider=STUB, params=GenerationParams(model_id="vlm-a")),
            ModelSpec(provider=STUB, params=GenerationParams(model_id="vlm-b")),
        ],
        prompt=prompt,
        concurrency=2,
        cache=False,
        judge=JudgeSpec(provider=ProviderConfig(kind="stub", base_url="stub://judge"),
                        params=GenerationParams(temperature=0.0, model_id="judge")),
    )
    defaults.update(kwargs)
    return RunConfig(**defaults)


@pytest.fixture
def prompt(table1, template):
    return deterministic_prompt(table1, template)


class TestDataset:
    def test_fixture_dataset_loads(self, dataset_path):
        records = load_dataset(dataset_path)
        assert len(records) == 10
        assert all(r.review_status == "approved" for r in records)
        assert records[0].image_path.is_file()

    def test_missing_image_names_record(self, make_dataset, tmp_path):
        path = make_dataset([("rec-1", simple_ground_truth(), "approved")])
        (tmp_path / "images" / "rec-1.png").unlink()
        with pytest.raises(DatasetError, match="rec-1"):
            load_dataset(path)

    def test_malformed_line_numbered(self, make_dataset, tmp_path):
        path = make_dataset([("rec-1", simple_ground_truth(), "approved")])
        path.write_text(path.read_text() + "{broken\n")
        with pytest.raises(DatasetError, match="line 2"):
            load_dataset(path)

    def test_empty_file(self, tmp_path):
        path = tmp_path / "empty.jsonl"
        path.write_text("")
        with pytest.raises(DatasetError, match="empty dataset"):
            load_dataset(path)

    def test_duplicate_record_id(self, make_dataset):
        path = make_dataset([("rec-1", simple_ground_truth(), "approved")])
        path.write_text(path.read_text() * 2)
        with pytest.raises(DatasetError, match="duplicate record_id"):
            load_dataset(path)

    def test_approved_without_ground_truth_rejected(self, make_dataset):
        path = make_dataset([("rec-1", None, "approved")])
        with pytest.raises(DatasetError, match="approved records need"):
            load_dataset(path)

    def test_unknown_failure_label_rejected(self, make_dataset):
        path = make_dataset([("rec-1", simple_ground_truth(), "approved")])
        payload = json.loads(path.read_text())
        payload["failure_labels"] = ["gremlins"]
        path.write_text(json.dumps(payload) + "\n")
        with pytest.raises(DatasetError, match="gremlins"):
            load_dataset(path)

    def test_save_load_round_trip(self, make_dataset):
        path = make_dataset(
            [
                ("rec-1", simple_ground_truth(), "approved"),
                ("rec-2", None, "draft"),
            ]
        )
        records = load_dataset(path)
        records[0].failure_labels = frozenset({"hallucination"})
        save_dataset(records, path)
        reloaded = load_dataset(path)
        assert reloaded[0].failure_labels == frozenset({"hallucination"})
        assert reloaded[1].ground_truth is None
        assert reloaded[0].ground_truth.hazards == records[0].ground_truth.hazards


class TestRunModels:
    def test_one_result_per_model_record_pair(self, make_dataset, prompt):
        path = make_dataset([(f"rec-{i}", simple_ground_truth(), "approved") for i in range(3)])
        records = load_dataset(path)
        config = two_model_config(prompt)
        results = run_models(config, records)
        assert len(results) == 6
        assert [(r.model_id, r.record_id) for r in results[:3]] == [
            ("vlm-a", "rec-0"), ("vlm-a", "rec-1"), ("vlm-a", "rec-2"),
        ]
        assert all(r.ok for r in results)

    def test_stable_across_runs_and_concurrency(self, make_dataset, prompt):
        path = make_dataset([(f"rec-{i}", simple_ground_truth(), "approved") for i in range(3)])
        records = load_dataset(path)
        serial = run_models(two_model_config(prompt, concurrency=1), records)
        parallel = run_models(two_model_config(prompt, concurrency=4), records)
        assert [(r.record_id, r.model_id, r.completion.text) for r in serial] == [
            (r.record_id, r.model_id, r.completion.text) for r in parallel
        ]

    def test_single_failure_is_isolated(self, make_dataset, prompt):
        path = make_dataset([(f"rec-{i}", simple_ground_truth(), "approved") for i in range(3)])
        records = load_dataset(path)
        poison_hash = encode_image(records[1].image_path.read_bytes(), "png").content_hash

        class FlakyProvider(StubProvider):
            def complete(self, prompt_text, image=None, params=GenerationParams()):
                if image is not None and image.content_hash == poison_hash:
                    raise ProviderError("boom")
                return super().complete(prompt_text, image=image, params=params)

        config = two_model_config(prompt)
        results = run_models(config, records, providers={"vlm-a": FlakyProvider(), "vlm-b": StubProvider()})
        failed = [r for r in results if not r.ok]
        assert len(failed) == 1
        assert failed[0].record_id == "rec-1"
        assert failed[0].model_id == "vlm-a"
        assert "boom" in failed[0].error
        assert sum(r.ok for r in results) == 5

    def test_cached_rerun_makes_zero_provider_calls(self, make_dataset, prompt, tmp_path):
        path = make_dataset([(f"rec-{i}", simple_ground_truth(), "approved") for i in range(3)])
        records = load_dataset(path)
        cache_dir = tmp_path / "cache"
        config = two_model_config(prompt, cache=True)

        first_stubs = {"vlm-a": StubProvider(), "vlm-b": StubProvider()}
        first = run_models(config, records, providers=first_stubs, cache_dir=cache_dir)
        assert sum(s.total_calls for s in first_stubs.values()) == 6

        second_stubs = {"vlm-a": StubProvider(), "vlm-b": StubProvider()}
        second = run_models(config, records, providers=second_stubs, cache_dir=cache_dir)
        assert sum(s.total_calls for s in second_stubs.values()) == 0
        assert [(r.completion.text, r.completion.latency) for r in first] == [
            (r.completion.text, r.completion.latency) for r in second
        ]

    def test_results_survive_save_load(self, make_dataset, prompt, tmp_path):
        path = make_dataset([("rec-0", simple_ground_truth(), "approved")])
        records = load_dataset(path)
        results = run_models(two_model_config(prompt), records)
        out = tmp_path / "results.jsonl"
        save_results(results, out)
        loaded = load_results(out)
        assert [(r.record_id, r.model_id, r.completion.text, r.error) for r in loaded] == [
            (r.record_id, r.model_id, r.completion.text, r.error) for r in results
        ]
        assert loaded[0].parsed.hazards == results[0].parsed.hazards


class TestBootstrap:
    def test_drafts_created_for_missing_ground_truth(self, make_dataset, prompt):
        path = make_dataset([("rec-0", None, "draft"), ("rec-1", simple_ground_truth(), "approved")])
        records = load_dataset(path)
        updated, issues = bootstrap_ground_truth(records, StubProvider(), prompt)
        assert issues == []
        assert updated[0].ground_truth is not None
        assert updated[0].review_status == "draft"
        # existing ground truth untouched
        assert updated[1].ground_truth.summary == records[1].ground_truth.summary

    def test_provider_failure_leaves_record_draft_empty(self, make_dataset, prompt):
        path = make_dataset([("rec-0", None, "draft")])
        records = load_dataset(path)

        class DownProvider(StubProvider):
            def complete(self, *args, **kwargs):
                raise ProviderError("offline")

        updated, issues = bootstrap_ground_truth(records, DownProvider(), prompt)
        assert updated[0].ground_truth is None
        assert issues == [("rec-0", "offline")]

    def test_draft_gate_refuses_evaluation(self, make_dataset, prompt):
        path = make_dataset(
            [
                ("rec-0", simple_ground_truth(), "approved"),
                ("rec-1", simple_ground_truth(), "draft"),
                ("rec-2", None, "draft"),
            ]
        )
        records = load_dataset(path)
        config = two_model_config(prompt)
        results = run_models(config, records)
        with pytest.raises(DraftGateError) as excinfo:
            evaluate_run(config, results, records, StubProvider())
        assert excinfo.value.draft_ids == ["rec-1", "rec-2"]
        assert "rec-1" in str(excinfo.value)


class TestEvaluate:
    def test_identical_prediction_scores_perfectly(self, make_dataset, prompt):
        path = make_dataset([("rec-0", simple_ground_truth(), "approved")])
        records = load_dataset(path)
        config = two_model_config(prompt)
        # pin each model's output to the canonical ground-truth text
        providers = {}
        image = encode_image(records[0].image_path.read_bytes(), "png")
        for spec in config.models:
            stub = StubProvider()
            stub.register(prompt.text, canonicalize(records[0].ground_truth),
                          image=image, params=spec.params)
            providers[spec.model_id] = stub
        results = run_models(config, records, providers=providers)
        table = evaluate_run(config, results, records, StubProvider(),
                             judge_provider=StubProvider(flavor=FLAVOR_JUDGE))
        assert len(table.rows) == 4  # 2 models x 2 tracks
        for row in table.rows:
            assert row.cosine == pytest.approx(1.0, abs=1e-12)
            assert row.bert_f1 == pytest.approx(1.0, abs=1e-12)
            assert row.n == 1
        overall = [r for r in table.rows if r.track == TRACK_OVERALL]
        assert all(r.judge_normalized is not None for r in overall)
        detection = [r for r in table.rows if r.track == TRACK_HAZARD_DETECTION]
        assert all(r.judge_normalized is None for r in detection)

    def test_empty_prediction_vs_rich_truth_matches_oracle(self, make_dataset, prompt):
        gt = simple_ground_truth(
            summary="Deep trench beside the access road.",
            names=("Deep trench", "Loose spoil heap"),
        )
        path = make_dataset([("rec-0", gt, "approved")])
        records = load_dataset(path)
        config = two_model_config(prompt, models=two_model_config(prompt).models[:1])
        image = encode_image(records[0].image_path.read_bytes(), "png")
        stub = StubProvider()
        stub.register(prompt.text, "Summary: Deep trench beside the access road.",
                      image=image, params=config.models[0].params)
        results = run_models(config, records, providers={"vlm-a": stub})
        embedder = StubProvider()
        table = evaluate_run(config, results, records, embedder, judge_provider=None)

        row = next(r for r in table.rows if r.track == TRACK_OVERALL)
        pred_text = canonicalize(results[0].parsed)
        gt_text = canonicalize(records[0].ground_truth)
        oracle = brute_force_bertscore(
            embedder.embed_tokens(pred_text, "roberta-large").vectors.tolist(),
            embedder.embed_tokens(gt_text, "roberta-large").vectors.tolist(),
        )
        assert row.bert_precision == pytest.approx(oracle.precision, abs=1e-9)
        assert row.bert_recall == pytest.approx(oracle.recall, abs=1e-9)
        assert row.bert_recall < row.bert_precision

    def test_failed_samples_excluded_from_n(self, make_dataset, prompt):
        path = make_dataset([(f"rec-{i}", simple_ground_truth(), "approved") for i in range(3)])
        records = load_dataset(path)
        poison_hash = encode_image(records[2].image_path.read_bytes(), "png").content_hash

        class FlakyProvider(StubProvider):
            def complete(self, prompt_text, image=None, params=GenerationParams()):
                if image is not None and image.content_hash == poison_hash:
                    raise ProviderError("boom")
                return super().complete(prompt_text, image=image, params=params)

        config = two_model_config(prompt, models=two_model_config(prompt).models[:1], judge=None)
        results = run_models(config, records, providers={"vlm-a": FlakyProvider()})
        table = evaluate_run(config, results, records, StubProvider())
        assert all(row.n == 2 for row in table.rows)

    def test_unknown_record_id_rejected(self, make_dataset, prompt):
        path = make_dataset([("rec-0", simple_ground_truth(), "approved")])
        records = load_dataset(path)
        config = two_model_config(prompt, judge=None)
        results = run_models(config, records)
        for result in results:
            result.record_id = "rec-unknown"
        with pytest.raises(EvaluationError, match="unknown record ids"):
            evaluate_run(config, results, records, StubProvider())

    def test_cache_never_changes_scores(self, make_dataset, prompt, tmp_path):
        path = make_dataset([(f"rec-{i}", simple_ground_truth(), "approved") for i in range(2)])
        records = load_dataset(path)
        uncached = two_model_config(prompt, cache=False)
        cached = two_model_config(prompt, cache=True)
        results_uncached = run_models(uncached, records)
        results_cached = run_models(cached, records, cache_dir=tmp_path / "cache")
        table_u = evaluate_run(uncached, results_uncached, records, StubProvider(),
                               judge_provider=StubProvider(flavor=FLAVOR_JUDGE))
        table_c = evaluate_run(cached, results_cached, records, StubProvider(),
                               judge_provider=StubProvider(flavor=FLAVOR_JUDGE))
        assert table_u.rows == table_c.rows


class TestBenchLatency:
    def _results(self, latencies, model_id="m"):
        from hazardeval.harness import RunResult
        from hazardeval.reportparse import HazardReport

        return [
            RunResult(
                record_id=f"r{i}",
                model_id=model_id,
                completion=CompletionResult(text="Summary: x.", latency=value),
                parsed=HazardReport(summary="x", hazards=(), raw_text=""),
            )
            for i, value in enumerate(latencies)
        ]

    def test_mean(self):
        rows = bench_latency(self._results([1.0, 2.0, 3.0]))
        assert rows[0].mean == pytest.approx(2.0)
        assert rows[0].n == 3

    def test_single_result_collapses_percentiles(self):
        rows = bench_latency(self._results([0.7]))
        assert rows[0].mean == rows[0].p50 == rows[0].p95 == 0.7

    def test_percentiles_match_numpy_linear_interpolation(self):
        values = [0.5, 1.5, 2.0, 4.0, 9.0]
        rows = bench_latency(self._results(values))
        assert rows[0].p50 == float(np.percentile(values, 50))
        assert rows[0].p95 == float(np.percentile(values, 95))

    def test_failed_results_excluded(self):
        results = self._results([1.0, 3.0])
        results[1].error = "anything"
        rows = bench_latency(results)
        assert rows[0].mean == pytest.approx(1.0)
        assert rows[0].n == 1

    def test_empty_rejected(self):
        with pytest.raises(EvaluationError):
            bench_latency([])


class TestEmitReport:
    @pytest.fixture
    def table(self):
        rows = (
            ScoreRow("vlm-a", TRACK_HAZARD_DETECTION, 0.51, 0.7, 0.6, 0.65, None, 10),
            ScoreRow("vlm-a", TRACK_OVERALL, 0.73, 0.91, 0.9, 0.906, 0.612, 10),
        )
        latency = (LatencyRow("vlm-a", 4.57, 4.5, 6.1, 10),)
        return EvalTable(rows=rows, latency_rows=latency, run_fingerprint="f" * 64)

    def test_markdown_has_both_group_titles(self, table, tmp_path):
        written = emit_report(table, ["markdown"], tmp_path)
        text = written["markdown"].read_text()
        assert "Hazard Detection Accuracy" in text
        assert "Overall Response Accuracy and Completeness" in text
        assert "Inference Latency" in text

    def test_byte_deterministic(self, table, tmp_path):
        first = emit_report(table, ["json", "csv", "markdown"], tmp_path / "a")
        second = emit_report(table, ["json", "csv", "markdown"], tmp_path / "b")
        for fmt in first:
            assert first[fmt].read_bytes() == second[fmt].read_bytes()

    def test_csv_one_row_per_model_track(self, table, tmp_path):
        written = emit_report(table, ["csv"], tmp_path)
        lines = written["csv"].read_text().strip().splitlines()
        assert len(lines) == 1 + len(table.rows)
        assert lines[0].startswith("model_id,track,cosine")

    def test_json_round_trip(self, table, tmp_path):
        written = emit_report(table, ["json"], tmp_path)
        payload = json.loads(written["json"].read_text())
        restored = table_from_dict(payload)
        assert restored.run_fingerprint == table.run_fingerprint
        assert restored.rows[1].judge_normalized == pytest.approx(0.612)

    def test_unknown_format_rejected(self, table, tmp_path):
        with pytest.raises(ValueError, match="unknown report formats"):
            emit_report(table, ["yaml"], tmp_path)

    def test_empty_rows_rejected(self, tmp_path):
        empty = EvalTable(rows=(), latency_rows=(), run_fingerprint="x")
        with pytest.raises(ValueError, match="no score rows"):
            emit_report(empty, ["json"], tmp_path)


class TestRunFingerprint:
    def test_sensitive_to_models_and_records(self, make_dataset, prompt):
        path = make_dataset([(f"rec-{i}", simple_ground_truth(), "approved") for i in range(2)])
        records = load_dataset(path)
        config = two_model_config(prompt)
        base = run_fingerprint(config, records)
        assert run_fingerprint(config, records) == base
        assert run_fingerprint(config, records[:1]) != base
        one_model = two_model_config(prompt, models=config.models[:1])
        assert run_fingerprint(one_model, records) != base

    def test_execution_knobs_do_not_change_identity(self, make_dataset, prompt):
        path = make_dataset([("rec-0", simple_ground_truth(), "approved")])
        records = load_dataset(path)
        assert run_fingerprint(two_model_config(prompt, cache=True), records) == run_fingerprint(
            two_model_config(prompt, cache=False, concurrency=7), records
        )


class TestEndToEndDeterminism:
    def test_full_offline_pipeline_reproduces_bytes(self, tmp_path, dataset_path):
        import sys

        sys.path.insert(0, str(dataset_path.parent.parent / "tests"))
        from helpers import golden_pipeline

        paths_a, calls_a = golden_pipeline(tmp_path / "cache-a", tmp_path / "out-a")
        paths_b, calls_b = golden_pipeline(tmp_path / "cache-b", tmp_path / "out-b")
        assert calls_a == calls_b > 0
        for fmt in paths_a:
            assert paths_a[fmt].read_bytes() == paths_b[fmt].read_bytes()
