"""Release criteria, one test per criterion, each printing a PASS/FAIL line.

Run `pytest tests/test_acceptance.py -s` to see the lines as they execute.
The live-provider smoke is skipped unless HAZARDEVAL_LIVE_SMOKE=1 and
HAZARDEVAL_LIVE_CONFIG point at a config with reachable credentials.
"""

from __future__ import annotations

import os
import random
import string
import time
from contextlib import contextmanager
from itertools import product

import numpy as np
import pytest

from hazardeval.judge import JudgeScores, normalized_score
from hazardeval.metrics import TokenEmbeddingSet, bertscore, cosine_similarity
from hazardeval.reportparse import (
    HazardRecord,
    HazardReport,
    ParseError,
    canonicalize,
    parse_report,
)

from conftest import simple_ground_truth
from helpers import GOLDEN_DIR, GOLDEN_FILES, golden_pipeline
from test_metrics import brute_force_bertscore, random_unit_rows


@contextmanager
def criterion(name: str):
    try:
        yield
    except BaseException:
        print(f"FAIL: {name}")
        raise
    print(f"PASS: {name}")


def test_metric_kernel_oracle_suite():
    with criterion("metric kernel oracle suite (<5s)"):
        start = time.perf_counter()

        assert abs(cosine_similarity([1, 2, 2], [2, 1, 2]) - 8 / 9) <= 1e-12

        rng = np.random.default_rng(0xA11CE)
        pairs = 0
        while pairs < 1000:
            dim = int(rng.integers(1, 9))
            a = rng.uniform(-10.0, 10.0, dim)
            b = rng.uniform(-10.0, 10.0, dim)
            if np.linalg.norm(a) < 1e-9 or np.linalg.norm(b) < 1e-9:
                continue
            pairs += 1
            assert abs(cosine_similarity(a, a) - 1.0) <= 1e-9
            assert cosine_similarity(a, b) == cosine_similarity(b, a)
            scale = float(rng.uniform(0.01, 100.0))
            assert abs(cosine_similarity(scale * a, b) - cosine_similarity(a, b)) <= 1e-9

        for _ in range(1000):
            dim = int(rng.integers(1, 5))
            candidate = random_unit_rows(rng, int(rng.integers(1, 7)), dim)
            reference = random_unit_rows(rng, int(rng.integers(1, 7)), dim)
            fast = bertscore(
                TokenEmbeddingSet(tuple(f"c{i}" for i in range(len(candidate))), candidate),
                TokenEmbeddingSet(tuple(f"r{i}" for i in range(len(reference))), reference),
            )
            slow = brute_force_bertscore(candidate.tolist(), reference.tolist())
            assert abs(fast.precision - slow.precision) <= 1e-9
            assert abs(fast.recall - slow.recall) <= 1e-9
            assert abs(fast.f1 - slow.f1) <= 1e-9

        elapsed = time.perf_counter() - start
        assert elapsed < 5.0, f"metric kernel suite took {elapsed:.2f}s"


def test_judge_normalization_exhaustive():
    with criterion("judge normalization exhaustive over all 125 triples"):
        assert normalized_score(JudgeScores(4, 5, 4)) == 13 / 15
        values = {}
        for c, a, cl in product(range(1, 6), repeat=3):
            score = normalized_score(JudgeScores(c, a, cl))
            assert 0.2 <= score <= 1.0
            values[(c, a, cl)] = score
        assert min(values.values()) == pytest.approx(0.2)
        assert max(values.values()) == 1.0
        for (c, a, cl), score in values.items():
            if c < 5:
                assert values[(c + 1, a, cl)] > score
            if a < 5:
                assert values[(c, a + 1, cl)] > score
            if cl < 5:
                assert values[(c, a, cl + 1)] > score


_EXPECTED_PARSES = {
    "gpt4o_trench": (["Open excavation", "Proximity to moving machinery"], [8, 7]),
    "gemini15pro_ladder": (["Unstable ladder positioning", "Clutter and debris on the ground"], [8, 6]),
    "llama32_grinding": (["PPE Compliance", "Sparks", "Electrical Equipment"], [8, 9, 7]),
    "internvl2_cables": (["Electrocution"], [8]),
}

_SAFE_CHARS = string.ascii_letters + string.digits + " ,'-"


def _random_report(rng: random.Random) -> HazardReport:
    def field(min_len=0, max_len=30):
        return "".join(rng.choices(_SAFE_CHARS, k=rng.randrange(min_len, max_len))).strip()

    def name():
        while True:
            value = field(1, 24)
            if value:
                return value

    hazards = tuple(
        HazardRecord(
            index=i + 1,
            name=name(),
            severity=rng.randint(1, 10),
            explanation=field(),
            suggestion=field(),
        )
        for i in range(rng.randrange(0, 5))
    )
    return HazardReport(summary=field(), hazards=hazards, raw_text="")


def test_parser_fixture_suite(sample_outputs):
    with criterion("parser fixture suite + 500 round trips + 1e6-input fuzz"):
        for stem, (names, severities) in _EXPECTED_PARSES.items():
            report, issues = parse_report(sample_outputs[stem])
            assert [h.name for h in report.hazards] == names, stem
            assert [h.severity for h in report.hazards] == severities, stem
            assert issues == [], stem
            assert report.summary.strip(), stem

        rng = random.Random(0x5EED)
        for _ in range(500):
            report = _random_report(rng)
            parsed, _ = parse_report(canonicalize(report))
            assert parsed.summary == report.summary
            assert parsed.hazards == report.hazards

        tokens = [
            "Summary:", "Hazard", "No.", "1:", "2:", "999:", "Severity:", "8", "8/10",
            "8.", "0", ":", "/", ".", "\n", " ", "Explanation:", "Suggestion:",
            "fire", "pit", "ß", "⚠️", "你好", "hazard no.3:",
            "severity:-1", "summary:summary:", "HAZARD 12:", "\t",
        ]
        survived = 0
        for _ in range(1_000_000):
            text = "".join(rng.choices(tokens, k=rng.randrange(0, 10)))
            try:
                parse_report(text)
            except ParseError:
                pass
            survived += 1
        assert survived == 1_000_000


def test_deterministic_end_to_end_golden_run(tmp_path):
    with criterion("deterministic end-to-end golden run (<30s, cache replay makes 0 calls)"):
        start = time.perf_counter()
        goldens = {fmt: (GOLDEN_DIR / name).read_bytes() for fmt, name in GOLDEN_FILES.items()}

        emitted = []
        for index in range(3):
            paths, calls = golden_pipeline(tmp_path / f"cache-{index}", tmp_path / f"out-{index}")
            assert calls > 0
            emitted.append(paths)
        for fmt, golden_bytes in goldens.items():
            for paths in emitted:
                assert paths[fmt].read_bytes() == golden_bytes, f"{fmt} diverged from golden"

        # rerun against a warm cache: identical bytes, zero provider invocations
        paths, calls = golden_pipeline(tmp_path / "cache-0", tmp_path / "out-rerun")
        assert calls == 0, f"cached rerun still made {calls} provider calls"
        for fmt, golden_bytes in goldens.items():
            assert paths[fmt].read_bytes() == golden_bytes

        elapsed = time.perf_counter() - start
        assert elapsed < 30.0, f"golden run took {elapsed:.2f}s"


def test_draft_gate_refuses_unreviewed_records(make_dataset):
    with criterion("draft gate refuses evaluation and lists draft ids"):
        from hazardeval.config import AppConfig
        from hazardeval.guidelines import load_guidelines
        from hazardeval.harness import DraftGateError, RunConfig, evaluate_run, load_dataset, run_models
        from hazardeval.prompting import ResponseTemplate, deterministic_prompt
        from hazardeval.providers import StubProvider
        from conftest import FIXTURES

        dataset = make_dataset(
            [
                ("ok-0", simple_ground_truth(), "approved"),
                ("pending-1", simple_ground_truth(), "draft"),
                ("pending-2", None, "draft"),
            ]
        )
        records = load_dataset(dataset)
        config = AppConfig.default_offline()
        prompt = deterministic_prompt(load_guidelines(FIXTURES / "guidelines_table1.json"), ResponseTemplate())
        run_config = RunConfig(models=config.models, prompt=prompt, cache=False, judge=None)
        results = run_models(run_config, records)
        with pytest.raises(DraftGateError) as excinfo:
            evaluate_run(run_config, results, records, StubProvider())
        assert excinfo.value.draft_ids == ["pending-1", "pending-2"]
        assert "pending-1" in str(excinfo.value) and "pending-2" in str(excinfo.value)


_LIVE = os.environ.get("HAZARDEVAL_LIVE_SMOKE") == "1"


@pytest.mark.skipif(
    not _LIVE,
    reason="live smoke disabled; set HAZARDEVAL_LIVE_SMOKE=1 and HAZARDEVAL_LIVE_CONFIG to run",
)
def test_live_provider_smoke():
    with criterion("live provider smoke: 3 images, >=2 parse, latency reported"):
        from hazardeval.config import load_app_config
        from hazardeval.guidelines import load_guidelines
        from hazardeval.harness import bench_latency, RunResult
        from hazardeval.prompting import ResponseTemplate, deterministic_prompt
        from hazardeval.providers import CompletionResult, build_provider, encode_image, media_type_for
        from conftest import FIXTURES

        config = load_app_config(os.environ["HAZARDEVAL_LIVE_CONFIG"])
        spec = config.models[0]
        provider = build_provider(spec.provider, config.cache_dir)
        guidelines = load_guidelines(FIXTURES / "guidelines_table1.json")
        prompt = deterministic_prompt(guidelines, ResponseTemplate(), config.prompts_dir)

        images = sorted((FIXTURES / "images").glob("*.png"))[:3]
        results, parsed_ok = [], 0
        for image_path in images:
            attachment = encode_image(image_path.read_bytes(), media_type_for(image_path))
            completion = provider.complete(prompt.text, image=attachment, params=spec.params)
            try:
                report, _ = parse_report(completion.text, config.run.severity_scale)
                parsed_ok += 1
                parsed = report
            except ParseError:
                parsed = HazardReport(summary="", hazards=(), raw_text=completion.text)
            results.append(
                RunResult(
                    record_id=image_path.stem,
                    model_id=spec.model_id,
                    completion=completion,
                    parsed=parsed,
                )
            )
        assert parsed_ok >= 2, f"only {parsed_ok}/3 live outputs parsed"
        print("| Model | Mean (s) | p50 (s) | p95 (s) | n |")
        print("|---|---|---|---|---|")
        for row in bench_latency(results):
            print(f"| {row.model_id} | {row.mean:.2f} | {row.p50:.2f} | {row.p95:.2f} | {row.n} |")
