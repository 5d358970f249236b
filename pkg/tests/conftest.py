import json
from pathlib import Path

import pytest

from hazardeval.guidelines import load_guidelines
from hazardeval.prompting import ResponseTemplate

REPO = Path(__file__).resolve().parents[1]
FIXTURES = REPO / "fixtures"


@pytest.fixture(scope="session")
def repo_root() -> Path:
    return REPO


@pytest.fixture(scope="session")
def guidelines_path() -> Path:
    return FIXTURES / "guidelines_table1.json"


@pytest.fixture(scope="session")
def table1(guidelines_path):
    return load_guidelines(guidelines_path)


@pytest.fixture
def template() -> ResponseTemplate:
    return ResponseTemplate()


@pytest.fixture(scope="session")
def sample_outputs() -> dict[str, str]:
    """Shipped model-output texts, keyed by fixture stem."""
    return {
        path.stem: path.read_text(encoding="utf-8")
        for path in sorted((FIXTURES / "model_outputs").glob("*.txt"))
    }


@pytest.fixture(scope="session")
def dataset_path() -> Path:
    return FIXTURES / "dataset.jsonl"


def tiny_png(index: int = 0) -> bytes:
    """Minimal valid PNG bytes, unique per index."""
    import struct
    import zlib

    def chunk(tag, data):
        return struct.pack(">I", len(data)) + tag + data + struct.pack(">I", zlib.crc32(tag + data) & 0xFFFFFFFF)

    raw = b"".join(b"\x00" + bytes((index % 256, x * 40 % 256, 200)) for x in range(4))
    ihdr = struct.pack(">IIBBBBB", 1, 4, 8, 2, 0, 0, 0)
    return b"\x89PNG\r\n\x1a\n" + chunk(b"IHDR", ihdr) + chunk(b"IDAT", zlib.compress(raw)) + chunk(b"IEND", b"")


@pytest.fixture
def make_dataset(tmp_path):
    """Write a small dataset under tmp and return its path.

    records: list of (record_id, ground_truth_dict_or_None, review_status).
    """

    def build(records, name="dataset.jsonl"):
        image_dir = tmp_path / "images"
        image_dir.mkdir(exist_ok=True)
        lines = []
        for i, (record_id, ground_truth, status) in enumerate(records):
            image_name = f"{record_id}.png"
            (image_dir / image_name).write_bytes(tiny_png(i))
            lines.append(
                json.dumps(
                    {
                        "record_id": record_id,
                        "image_ref": f"images/{image_name}",
                        "ground_truth": ground_truth,
                        "review_status": status,
                        "failure_labels": [],
                    }
                )
            )
        path = tmp_path / name
        path.write_text("\n".join(lines) + "\n", encoding="utf-8")
        return path

    return build


def simple_ground_truth(summary="Open pit near the gate.", names=("Open pit",), severity=6) -> dict:
    hazards = [
        {
            "index": i + 1,
            "name": name,
            "severity": severity,
            "explanation": f"{name} is close to the walkway.",
            "suggestion": f"Fence off the {name.lower()}.",
        }
        for i, name in enumerate(names)
    ]
    return {"summary": summary, "hazards": hazards, "raw_text": ""}
