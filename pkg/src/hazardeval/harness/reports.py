"""Emit an EvalTable as machine-readable JSON/CSV and human-readable Markdown.

Output is byte-deterministic for a fixed table: fixed key order, fixed float
formatting, newline-terminated files.
"""

from __future__ import annotations

import csv
import io
import json
from pathlib import Path

from ..metrics import ScoreRow, TRACK_HAZARD_DETECTION, TRACK_OVERALL
from .evaluate import EvalTable, LatencyRow

FORMATS = ("json", "csv", "markdown")
_FILENAMES = {"json": "report.json", "csv": "report.csv", "markdown": "report.md"}

_TRACK_TITLES = {
    TRACK_HAZARD_DETECTION: "Hazard Detection Accuracy",
    TRACK_OVERALL: "Overall Response Accuracy and Completeness",
}


def _round(value: float | None):
    return None if value is None else round(value, 6)


def table_to_dict(table: EvalTable) -> dict:
    return {
        "run_fingerprint": table.run_fingerprint,
        "rows": [
            {
                "model_id": row.model_id,
                "track": row.track,
                "cosine": _round(row.cosine),
                "bert_precision": _round(row.bert_precision),
                "bert_recall": _round(row.bert_recall),
                "bert_f1": _round(row.bert_f1),
                "judge_normalized": _round(row.judge_normalized),
                "n": row.n,
            }
            for row in table.rows
        ],
        "latency": [
            {
                "model_id": row.model_id,
                "mean_s": _round(row.mean),
                "p50_s": _round(row.p50),
                "p95_s": _round(row.p95),
                "n": row.n,
            }
            for row in table.latency_rows
        ],
    }


def table_from_dict(payload: dict) -> EvalTable:
    try:
        rows = tuple(
            ScoreRow(
                model_id=row["model_id"],
                track=row["track"],
                cosine=row["cosine"],
                bert_precision=row["bert_precision"],
                bert_recall=row["bert_recall"],
                bert_f1=row["bert_f1"],
                judge_normalized=row.get("judge_normalized"),
                n=row["n"],
            )
            for row in payload["rows"]
        )
        latency_rows = tuple(
            LatencyRow(
                model_id=row["model_id"],
                mean=row["mean_s"],
                p50=row["p50_s"],
                p95=row["p95_s"],
                n=row["n"],
            )
            for row in payload["latency"]
        )
        return EvalTable(rows=rows, latency_rows=latency_rows, run_fingerprint=payload["run_fingerprint"])
    except (KeyError, TypeError) as exc:
        raise ValueError(f"bad eval table payload: {exc}") from exc


def render_json(table: EvalTable) -> str:
    return json.dumps(table_to_dict(table), ensure_ascii=False, indent=2) + "\n"


def render_csv(table: EvalTable) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(
        ["model_id", "track", "cosine", "bert_precision", "bert_recall", "bert_f1", "judge_normalized", "n"]
    )
    for row in table.rows:
        writer.writerow(
            [
                row.model_id,
                row.track,
                f"{row.cosine:.6f}",
                f"{row.bert_precision:.6f}",
                f"{row.bert_recall:.6f}",
                f"{row.bert_f1:.6f}",
                "" if row.judge_normalized is None else f"{row.judge_normalized:.6f}",
                row.n,
            ]
        )
    return buffer.getvalue()


def render_markdown(table: EvalTable) -> str:
    lines = ["# Evaluation Report", "", f"Run fingerprint: `{table.run_fingerprint}`", ""]
    for track in (TRACK_HAZARD_DETECTION, TRACK_OVERALL):
        rows = [row for row in table.rows if row.track == track]
        if not rows:
            continue
        lines.append(f"## {_TRACK_TITLES[track]}")
        lines.append("")
        with_judge = track == TRACK_OVERALL
        header = ["Model", "Cosine Similarity", "BERTScore F1"]
        if with_judge:
            header.append("LLM as Judge")
        header.append("n")
        lines.append("| " + " | ".join(header) + " |")
        lines.append("|" + "---|" * len(header))
        for row in rows:
            cells = [row.model_id, f"{row.cosine:.3f}", f"{row.bert_f1:.3f}"]
            if with_judge:
                cells.append("-" if row.judge_normalized is None else f"{row.judge_normalized:.3f}")
            cells.append(str(row.n))
            lines.append("| " + " | ".join(cells) + " |")
        lines.append("")
    if table.latency_rows:
        lines.append("## Inference Latency")
        lines.append("")
        lines.append("| Model | Mean (s) | p50 (s) | p95 (s) | n |")
        lines.append("|---|---|---|---|---|")
        for row in table.latency_rows:
            lines.append(
                f"| {row.model_id} | {row.mean:.2f} | {row.p50:.2f} | {row.p95:.2f} | {row.n} |"
            )
        lines.append("")
    return "\n".join(lines)


def emit_report(table: EvalTable, formats, out_dir: str | Path) -> dict[str, Path]:
    """Write the requested formats under out_dir; returns format -> path."""
    if not table.rows:
        raise ValueError("refusing to emit a report with no score rows")
    requested = list(formats)
    unknown = [f for f in requested if f not in FORMATS]
    if unknown:
        raise ValueError(f"unknown report formats {unknown}; expected subset of {list(FORMATS)}")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    renderers = {"json": render_json, "csv": render_csv, "markdown": render_markdown}
    written: dict[str, Path] = {}
    for fmt in requested:
        path = out / _FILENAMES[fmt]
        path.write_text(renderers[fmt](table), encoding="utf-8")
        written[fmt] = path
    return written
