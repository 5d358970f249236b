"""Dataset records pairing site images with reviewed ground-truth reports.

The on-disk format is UTF-8 JSONL, one record per line:
{"record_id", "image_ref", "ground_truth": <canonical report JSON or null>,
 "review_status": "draft"|"approved", "failure_labels": [...]}.
Image refs resolve relative to the dataset file. Records bootstrapped by a
model stay "draft" until a human approves them; evaluation refuses drafts.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from pathlib import Path

from ..reportparse import HazardReport, ParseError, report_from_dict, report_to_dict

STATUS_DRAFT = "draft"
STATUS_APPROVED = "approved"
REVIEW_STATUSES = (STATUS_DRAFT, STATUS_APPROVED)

# failure-mode labels a reviewer can pin on a record during curation
LABEL_FALSE_HAZARD = "false_hazard"
LABEL_CONTEXT = "context_misclassification"
LABEL_HALLUCINATION = "hallucination"
FAILURE_LABELS = (LABEL_FALSE_HAZARD, LABEL_CONTEXT, LABEL_HALLUCINATION)


class DatasetError(ValueError):
    pass


@dataclass
class DatasetRecord:
    record_id: str
    image_ref: str
    ground_truth: HazardReport | None
    review_status: str = STATUS_DRAFT
    failure_labels: frozenset[str] = frozenset()
    image_path: Path = field(default=None, repr=False)  # resolved at load time

    def __post_init__(self):
        if not self.record_id.strip():
            raise DatasetError("record_id must be non-empty")
        if self.review_status not in REVIEW_STATUSES:
            raise DatasetError(f"record {self.record_id}: unknown review_status {self.review_status!r}")
        unknown = set(self.failure_labels) - set(FAILURE_LABELS)
        if unknown:
            raise DatasetError(f"record {self.record_id}: unknown failure labels {sorted(unknown)}")
        if self.review_status == STATUS_APPROVED:
            if self.ground_truth is None or not self.ground_truth.summary.strip():
                raise DatasetError(
                    f"record {self.record_id}: approved records need a ground truth with a summary"
                )
        if self.image_path is None:
            self.image_path = Path(self.image_ref)


def record_to_dict(record: DatasetRecord) -> dict:
    return {
        "record_id": record.record_id,
        "image_ref": record.image_ref,
        "ground_truth": report_to_dict(record.ground_truth) if record.ground_truth else None,
        "review_status": record.review_status,
        "failure_labels": sorted(record.failure_labels),
    }


def record_from_dict(payload: dict, base_dir: Path | None = None) -> DatasetRecord:
    if not isinstance(payload, dict):
        raise DatasetError("record must be a JSON object")
    try:
        record_id = payload["record_id"]
        image_ref = payload["image_ref"]
    except KeyError as exc:
        raise DatasetError(f"record missing field {exc.args[0]!r}") from exc
    if not isinstance(record_id, str) or not isinstance(image_ref, str):
        raise DatasetError("record_id and image_ref must be strings")
    raw_gt = payload.get("ground_truth")
    try:
        ground_truth = report_from_dict(raw_gt) if raw_gt is not None else None
    except ParseError as exc:
        raise DatasetError(f"record {record_id}: bad ground_truth: {exc}") from exc
    labels = payload.get("failure_labels", [])
    if not isinstance(labels, list):
        raise DatasetError(f"record {record_id}: failure_labels must be a list")
    image_path = Path(image_ref)
    if base_dir is not None and not image_path.is_absolute():
        image_path = base_dir / image_path
    return DatasetRecord(
        record_id=record_id,
        image_ref=image_ref,
        ground_truth=ground_truth,
        review_status=payload.get("review_status", STATUS_DRAFT),
        failure_labels=frozenset(labels),
        image_path=image_path,
    )


def load_dataset(path: str | Path) -> list[DatasetRecord]:
    """Read a JSONL dataset, checking ids, statuses, and image existence."""
    path = Path(path)
    records: list[DatasetRecord] = []
    seen: set[str] = set()
    with path.open(encoding="utf-8") as handle:
        for line_no, line in enumerate(handle, start=1):
            if not line.strip():
                continue
            try:
                payload = json.loads(line)
            except json.JSONDecodeError as exc:
                raise DatasetError(f"{path} line {line_no}: not valid JSON: {exc}") from exc
            try:
                record = record_from_dict(payload, base_dir=path.parent)
            except DatasetError as exc:
                raise DatasetError(f"{path} line {line_no}: {exc}") from exc
            if record.record_id in seen:
                raise DatasetError(f"{path} line {line_no}: duplicate record_id {record.record_id!r}")
            seen.add(record.record_id)
            if not record.image_path.is_file():
                raise DatasetError(
                    f"{path} line {line_no}: record {record.record_id}: image not found: {record.image_path}"
                )
            records.append(record)
    if not records:
        raise DatasetError(f"{path}: empty dataset")
    return records


def save_dataset(records: list[DatasetRecord], path: str | Path):
    """Atomically rewrite the JSONL dataset file."""
    path = Path(path)
    lines = [json.dumps(record_to_dict(r), ensure_ascii=False) for r in records]
    tmp = path.with_suffix(path.suffix + ".tmp")
    tmp.write_text("\n".join(lines) + "\n", encoding="utf-8")
    os.replace(tmp, path)
