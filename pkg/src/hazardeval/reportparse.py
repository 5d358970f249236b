"""Parse free-form model output into a structured hazard report.

Models are asked to answer with a summary line followed by numbered hazard
blocks (name, severity, explanation, suggestion). In practice the labels drift:
"Hazard No. 1:" vs "Hazard 1:", severities like "8", "8.", or "8/10", labels in
any case, blocks flattened onto one line. The parser scans for labels anywhere
in the text, assembles best-effort records, and reports recoverable problems as
ParseIssues instead of failing. It only refuses a text with neither a summary
nor a single hazard block.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

DEFAULT_SCALE = (1, 10)

ISSUE_MISSING_SUMMARY = "missing_summary"
ISSUE_BAD_SEVERITY = "bad_severity"
ISSUE_TRUNCATED_BLOCK = "truncated_block"
ISSUE_NO_HAZARD_BLOCKS = "no_hazard_blocks"


class ParseError(ValueError):
    """Raised when a text contains neither a summary nor any hazard block."""


@dataclass(frozen=True)
class HazardRecord:
    index: int
    name: str
    severity: int
    explanation: str
    suggestion: str


@dataclass(frozen=True)
class HazardReport:
    summary: str
    hazards: tuple[HazardRecord, ...] = ()
    raw_text: str = ""


@dataclass(frozen=True)
class ParseIssue:
    kind: str
    location: int  # character offset into the parsed text
    message: str


# One combined pass over the text; each alternative is a recognized label.
_LABEL_RE = re.compile(
    r"""
    (?P<summary>\bsummary\s*:)
    | (?P<hazard>\bhazard\s+(?:no\.?\s*)?(?P<hazard_num>\d+)\s*:)
    | (?P<severity>\bseverity\s*:\s*(?P<sev_num>\d+)(?:\s*/\s*(?P<sev_den>\d+))?\s*\.?)
    | (?P<explanation>\bexplanation\s*:)
    | (?P<suggestion>\bsuggestion\s*:)
    """,
    re.IGNORECASE | re.VERBOSE,
)


_LABEL_KINDS = ("summary", "hazard", "severity", "explanation", "suggestion")


@dataclass
class _Label:
    kind: str
    start: int
    end: int
    match: re.Match = field(repr=False, default=None)


def _scan_labels(text: str) -> list[_Label]:
    labels = []
    for m in _LABEL_RE.finditer(text):
        kind = next(k for k in _LABEL_KINDS if m.group(k))
        labels.append(_Label(kind=kind, start=m.start(), end=m.end(), match=m))
    return labels


def _clean_field(text: str) -> str:
    return text.strip()


def _clean_name(text: str) -> str:
    name = text.strip()
    if name.endswith("."):
        name = name[:-1].rstrip()
    return name


def parse_report(text: str, scale: tuple[int, int] = DEFAULT_SCALE) -> tuple[HazardReport, list[ParseIssue]]:
    """Best-effort parse of model output text into a HazardReport.

    Returns the report plus any recoverable issues. Raises ParseError only when
    the text contains neither a summary label nor a hazard block.
    """
    low, high = scale
    labels = _scan_labels(text)
    issues: list[ParseIssue] = []

    summary_label = next((l for l in labels if l.kind == "summary"), None)
    hazard_labels = [l for l in labels if l.kind == "hazard"]

    if summary_label is None and not hazard_labels:
        raise ParseError("unusable report: no summary and no hazard blocks found")

    if summary_label is None:
        issues.append(ParseIssue(ISSUE_MISSING_SUMMARY, 0, "no summary line found"))
        summary = ""
    else:
        # summary runs to the first hazard block after it (or end of text)
        stop = next((h.start for h in hazard_labels if h.start >= summary_label.end), len(text))
        summary = _clean_field(text[summary_label.end:stop])

    if not hazard_labels:
        issues.append(ParseIssue(ISSUE_NO_HAZARD_BLOCKS, 0, "no hazard blocks found"))

    records: list[HazardRecord] = []
    for pos, hazard in enumerate(hazard_labels):
        block_end = hazard_labels[pos + 1].start if pos + 1 < len(hazard_labels) else len(text)
        inner = [l for l in labels if hazard.end <= l.start < block_end]

        name_stop = inner[0].start if inner else block_end
        name = _clean_name(text[hazard.end:name_stop])

        severity_label = next((l for l in inner if l.kind == "severity"), None)
        explanation = _field_text(text, inner, block_end, "explanation")
        suggestion = _field_text(text, inner, block_end, "suggestion")

        if not name:
            issues.append(ParseIssue(ISSUE_TRUNCATED_BLOCK, hazard.start, f"hazard block {pos + 1} has no name"))
            continue
        if severity_label is None:
            issues.append(
                ParseIssue(ISSUE_TRUNCATED_BLOCK, hazard.start, f"hazard block {pos + 1} ({name!r}) has no severity")
            )
            continue

        sev = int(severity_label.match.group("sev_num"))
        den = severity_label.match.group("sev_den")
        if den is not None and int(den) != high:
            issues.append(
                ParseIssue(
                    ISSUE_BAD_SEVERITY,
                    severity_label.start,
                    f"severity {sev}/{den} uses denominator {den}, expected {high}; record dropped",
                )
            )
            continue
        if not (low <= sev <= high):
            issues.append(
                ParseIssue(
                    ISSUE_BAD_SEVERITY,
                    severity_label.start,
                    f"severity {sev} outside scale {low}-{high}; record dropped",
                )
            )
            continue

        records.append(
            HazardRecord(
                index=len(records) + 1,
                name=name,
                severity=sev,
                explanation=explanation,
                suggestion=suggestion,
            )
        )

    report = HazardReport(summary=summary, hazards=tuple(records), raw_text=text)
    return report, issues


def _field_text(text: str, inner: list[_Label], block_end: int, kind: str) -> str:
    label = next((l for l in inner if l.kind == kind), None)
    if label is None:
        return ""
    following = [l for l in inner if l.start >= label.end]
    stop = following[0].start if following else block_end
    return _clean_field(text[label.end:stop])


def canonicalize(report: HazardReport) -> str:
    """Deterministic text rendering of a report's structured fields.

    Parsing the canonical text reproduces the report's summary and hazards, so
    both metric tracks can compare texts with a stable surface form.
    """
    lines = [f"Summary: {report.summary}"]
    for record in report.hazards:
        lines.append(f"Hazard No. {record.index}: {record.name}")
        lines.append(f"Severity: {record.severity}")
        lines.append(f"Explanation: {record.explanation}")
        lines.append(f"Suggestion: {record.suggestion}")
    return "\n".join(lines)


def hazard_slice(report: HazardReport) -> str:
    """Summary plus hazard names only: the hazard-detection comparison text."""
    parts = [f"Summary: {report.summary}"]
    parts.extend(record.name for record in report.hazards)
    return "; ".join(parts)


def report_to_dict(report: HazardReport) -> dict:
    """Canonical JSON form used by dataset files, the service API, and the console."""
    return {
        "summary": report.summary,
        "hazards": [
            {
                "index": record.index,
                "name": record.name,
                "severity": record.severity,
                "explanation": record.explanation,
                "suggestion": record.suggestion,
            }
            for record in report.hazards
        ],
        "raw_text": report.raw_text,
    }


def report_from_dict(payload: dict, scale: tuple[int, int] = DEFAULT_SCALE) -> HazardReport:
    """Inverse of report_to_dict, validating field types and severity range."""
    low, high = scale
    if not isinstance(payload, dict):
        raise ParseError(f"report payload must be an object, got {type(payload).__name__}")
    summary = payload.get("summary", "")
    if not isinstance(summary, str):
        raise ParseError("report summary must be a string")
    hazards = []
    raw_hazards = payload.get("hazards", [])
    if not isinstance(raw_hazards, list):
        raise ParseError("report hazards must be a list")
    for i, entry in enumerate(raw_hazards, start=1):
        if not isinstance(entry, dict):
            raise ParseError(f"hazard {i} must be an object")
        name = entry.get("name", "")
        severity = entry.get("severity")
        if not isinstance(name, str) or not name.strip():
            raise ParseError(f"hazard {i} has a blank name")
        if not isinstance(severity, int) or isinstance(severity, bool) or not (low <= severity <= high):
            raise ParseError(f"hazard {i} severity {severity!r} outside scale {low}-{high}")
        hazards.append(
            HazardRecord(
                index=i,
                name=name.strip(),
                severity=severity,
                explanation=str(entry.get("explanation", "")),
                suggestion=str(entry.get("suggestion", "")),
            )
        )
    raw_text = payload.get("raw_text", "")
    if not isinstance(raw_text, str):
        raise ParseError("report raw_text must be a string")
    return HazardReport(summary=summary, hazards=tuple(hazards), raw_text=raw_text)
