import json

import pytest
from fastapi.testclient import TestClient

from hazardeval.config import AppConfig
from hazardeval.harness import load_dataset
from hazardeval.providers import ProviderConfig, RetryPolicy
from hazardeval.service import create_app

from conftest import simple_ground_truth, tiny_png


@pytest.fixture
def service(make_dataset, tmp_path, guidelines_path):
    dataset = make_dataset(
        [
            ("rec-0", simple_ground_truth(), "approved"),
            ("rec-1", simple_ground_truth(names=("Sparks",)), "draft"),
            ("rec-2", simple_ground_truth(names=("Debris",)), "draft"),
        ]
    )
    config = AppConfig.default_offline()
    config.cache_dir = tmp_path / "cache"
    config.media_dir = tmp_path / "media"
    app = create_app(config, dataset, guidelines_path)
    client = TestClient(app)
    return client, dataset


class TestRecords:
    def test_list_records(self, service):
        client, _ = service
        body = client.get("/api/records").json()
        assert [r["record_id"] for r in body] == ["rec-0", "rec-1", "rec-2"]
        assert body[0]["review_status"] == "approved"

    def test_get_single_record(self, service):
        client, _ = service
        assert client.get("/api/records/rec-1").json()["record_id"] == "rec-1"
        assert client.get("/api/records/nope").status_code == 404

    def test_record_image_served(self, service):
        client, _ = service
        response = client.get("/api/records/rec-0/image")
        assert response.status_code == 200
        assert response.content.startswith(b"\x89PNG")

    def test_approve_persists_to_dataset_file(self, service):
        client, dataset = service
        body = {"review_status": "approved", "failure_labels": ["hallucination"]}
        response = client.put("/api/records/rec-1", json=body)
        assert response.status_code == 200
        assert response.json()["review_status"] == "approved"

        reloaded = load_dataset(dataset)
        rec = next(r for r in reloaded if r.record_id == "rec-1")
        assert rec.review_status == "approved"
        assert rec.failure_labels == frozenset({"hallucination"})

    def test_put_is_idempotent(self, service):
        client, _ = service
        body = {"review_status": "approved"}
        first = client.put("/api/records/rec-1", json=body).json()
        second = client.put("/api/records/rec-1", json=body).json()
        assert first == second

    def test_editing_ground_truth(self, service):
        client, dataset = service
        edited = simple_ground_truth(summary="Edited by a reviewer.", names=("Sparks", "Dust"))
        response = client.put("/api/records/rec-1", json={"ground_truth": edited})
        assert response.status_code == 200
        reloaded = load_dataset(dataset)
        rec = next(r for r in reloaded if r.record_id == "rec-1")
        assert rec.ground_truth.summary == "Edited by a reviewer."
        assert len(rec.ground_truth.hazards) == 2

    def test_out_of_scale_severity_rejected(self, service):
        client, _ = service
        bad = simple_ground_truth(severity=12)
        response = client.put("/api/records/rec-1", json={"ground_truth": bad})
        assert response.status_code == 422
        assert "severity" in response.json()["detail"]

    def test_unknown_failure_label_rejected(self, service):
        client, _ = service
        response = client.put("/api/records/rec-1", json={"failure_labels": ["gremlins"]})
        assert response.status_code == 422


class TestPromptEndpoints:
    def test_engineer_prompt(self, service):
        client, _ = service
        entries = [{"id": 1, "hazard": "Fires", "conditions": "open flames"}]
        response = client.post("/api/prompt/engineer", json={"guidelines": entries})
        assert response.status_code == 200
        body = response.json()
        assert "Fires" in body["text"]
        assert body["provenance"] == "deterministic"
        assert body["prompt_id"]

    def test_engineer_prompt_is_idempotent(self, service):
        client, _ = service
        entries = [{"id": 1, "hazard": "Fires", "conditions": "open flames"}]
        a = client.post("/api/prompt/engineer", json={"guidelines": entries}).json()
        b = client.post("/api/prompt/engineer", json={"guidelines": entries}).json()
        assert a == b

    def test_invalid_guidelines_rejected(self, service):
        client, _ = service
        response = client.post("/api/prompt/engineer", json={"guidelines": []})
        assert response.status_code == 422

    def test_served_guidelines(self, service):
        client, _ = service
        body = client.get("/api/guidelines").json()
        assert len(body["guidelines"]) == 10
        assert body["guidelines"][0]["hazard"] == "PPE Non-Compliance"

    def test_models_listed(self, service):
        client, _ = service
        body = client.get("/api/models").json()
        assert [m["model_id"] for m in body] == ["stub-vlm-a", "stub-vlm-b"]


class TestAssess:
    def test_returns_canonical_report_with_latency(self, service):
        client, _ = service
        response = client.post(
            "/api/assess",
            files={"image": ("upload.png", tiny_png(42), "image/png")},
            data={"model_id": "stub-vlm-a"},
        )
        assert response.status_code == 200
        body = response.json()
        assert body["latency"] >= 0
        assert "summary" in body["report"]
        assert isinstance(body["report"]["hazards"], list)

    def test_repeat_upload_reuses_media_path(self, service):
        client, _ = service
        for _ in range(2):
            response = client.post(
                "/api/assess",
                files={"image": ("upload.png", tiny_png(42), "image/png")},
                data={"model_id": "stub-vlm-a"},
            )
        media_refs = response.json()["media_ref"]
        assert media_refs.endswith(".png")

    def test_unknown_model(self, service):
        client, _ = service
        response = client.post(
            "/api/assess",
            files={"image": ("upload.png", tiny_png(1), "image/png")},
            data={"model_id": "missing-model"},
        )
        assert response.status_code == 404

    def test_unknown_prompt(self, service):
        client, _ = service
        response = client.post(
            "/api/assess",
            files={"image": ("upload.png", tiny_png(1), "image/png")},
            data={"model_id": "stub-vlm-a", "prompt_id": "not-a-prompt"},
        )
        assert response.status_code == 404


class TestRuns:
    def test_draft_gate_blocks_runs(self, service):
        client, _ = service
        response = client.post("/api/runs", json={})
        assert response.status_code == 409
        detail = response.json()["detail"]
        assert detail["draft_ids"] == ["rec-1", "rec-2"]

    def test_run_after_approval_and_idempotency(self, service):
        client, _ = service
        for record_id in ("rec-1", "rec-2"):
            assert client.put(f"/api/records/{record_id}", json={"review_status": "approved"}).status_code == 200
        first = client.post("/api/runs", json={})
        assert first.status_code == 200
        run_id = first.json()["run_id"]
        assert first.json()["cached"] is False

        table = client.get(f"/api/runs/{run_id}")
        assert table.status_code == 200
        body = table.json()
        assert body["run_fingerprint"] == run_id
        assert len(body["rows"]) == 4  # 2 models x 2 tracks
        assert {row["track"] for row in body["rows"]} == {"hazard_detection", "overall"}
        assert len(body["latency"]) == 2

        again = client.post("/api/runs", json={})
        assert again.json() == {"run_id": run_id, "status": "done", "cached": True}

    def test_unknown_run_id(self, service):
        client, _ = service
        assert client.get("/api/runs/deadbeef").status_code == 404

    def test_unknown_model_ids_rejected(self, service):
        client, _ = service
        response = client.post("/api/runs", json={"model_ids": ["ghost"]})
        assert response.status_code == 404


class TestCredentialHygiene:
    def test_secret_values_never_appear_in_responses(self, make_dataset, tmp_path, guidelines_path, monkeypatch):
        secret = "sk-super-secret-value-12345"
        monkeypatch.setenv("HZE_TEST_KEY", secret)
        dataset = make_dataset([("rec-0", simple_ground_truth(), "approved")])
        config = AppConfig.default_offline()
        config.cache_dir = tmp_path / "cache"
        config.media_dir = tmp_path / "media"
        config.providers["live"] = ProviderConfig(
            kind="openai_compatible",
            base_url="https://llm.example/v1",
            credential_ref="HZE_TEST_KEY",
            retry=RetryPolicy(max_attempts=1),
        )
        client = TestClient(create_app(config, dataset, guidelines_path))
        for path in ("/api/health", "/api/models", "/api/records", "/api/guidelines"):
            body = client.get(path).text
            assert secret not in body
