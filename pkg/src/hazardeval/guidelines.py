"""Load and render the safety-guideline taxonomy that seeds prompt building.

Guideline documents are UTF-8 JSON arrays of {"id", "hazard", "conditions"}
objects; `fixtures/guidelines_table1.json` ships the default ten-category
taxonomy. Entries keep their document order throughout.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path


class GuidelineError(ValueError):
    pass


@dataclass(frozen=True)
class Guideline:
    id: int
    hazard_name: str
    conditions: str

    def __post_init__(self):
        if not isinstance(self.id, int) or isinstance(self.id, bool) or self.id < 1:
            raise GuidelineError(f"guideline id must be a positive integer, got {self.id!r}")
        if not self.hazard_name.strip():
            raise GuidelineError(f"guideline {self.id} has a blank hazard name")
        if not self.conditions.strip():
            raise GuidelineError(f"guideline {self.id} has blank conditions")


@dataclass(frozen=True)
class GuidelineSet:
    guidelines: tuple[Guideline, ...]
    source_label: str = ""

    def __post_init__(self):
        if not self.guidelines:
            raise GuidelineError("a guideline set needs at least one entry")
        seen: dict[int, int] = {}
        for row, g in enumerate(self.guidelines, start=1):
            if g.id in seen:
                raise GuidelineError(f"duplicate guideline id {g.id} (rows {seen[g.id]} and {row})")
            seen[g.id] = row


def guideline_set_from_entries(entries, source_label: str = "") -> GuidelineSet:
    """Build a validated set from {"id", "hazard", "conditions"} objects.

    Errors name the offending row (1-based position in the sequence).
    """
    if not isinstance(entries, list):
        raise GuidelineError("expected a JSON array of guideline objects")
    if not entries:
        raise GuidelineError("no guidelines")
    guidelines = []
    for row, entry in enumerate(entries, start=1):
        if not isinstance(entry, dict):
            raise GuidelineError(f"row {row}: expected an object")
        try:
            gid = entry["id"]
            hazard = entry["hazard"]
            conditions = entry["conditions"]
        except KeyError as exc:
            raise GuidelineError(f"row {row}: missing field {exc.args[0]!r}") from exc
        if not isinstance(gid, int) or isinstance(gid, bool):
            raise GuidelineError(f"row {row}: id must be an integer, got {gid!r}")
        if not isinstance(hazard, str) or not isinstance(conditions, str):
            raise GuidelineError(f"row {row}: hazard and conditions must be strings")
        try:
            guidelines.append(Guideline(id=gid, hazard_name=hazard.strip(), conditions=conditions.strip()))
        except GuidelineError as exc:
            raise GuidelineError(f"row {row}: {exc}") from exc
    return GuidelineSet(guidelines=tuple(guidelines), source_label=source_label)


def load_guidelines(source: str | Path) -> GuidelineSet:
    """Load a guideline document, validating ids and non-blank fields."""
    path = Path(source)
    try:
        entries = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise GuidelineError(f"{path}: not valid JSON: {exc}") from exc
    try:
        return guideline_set_from_entries(entries, source_label=str(path))
    except GuidelineError as exc:
        raise GuidelineError(f"{path}: {exc}") from exc


def guidelines_to_entries(gset: GuidelineSet) -> list[dict]:
    return [
        {"id": g.id, "hazard": g.hazard_name, "conditions": g.conditions}
        for g in gset.guidelines
    ]


def dump_guidelines(gset: GuidelineSet) -> str:
    """Serialize a guideline set back to the JSON document format."""
    return json.dumps(guidelines_to_entries(gset), indent=2, ensure_ascii=False) + "\n"


def render_guidelines_text(gset: GuidelineSet) -> str:
    """Deterministic numbered block with each hazard name and its conditions."""
    return "\n".join(f"{g.id}. {g.hazard_name}: {g.conditions}" for g in gset.guidelines)
