"""Compile a guideline set into the inference prompt used for image assessment.

Two paths produce an EngineeredPrompt: asking a chat model to write the prompt
from a meta-prompt (the online path), or interpolating a fixed inspector
skeleton (the offline path used by tests and --offline runs). Skeleton texts
live as editable files under prompts/.
"""

from __future__ import annotations

import hashlib
import json
import os
from dataclasses import dataclass
from pathlib import Path

from .guidelines import GuidelineSet, render_guidelines_text

PROVENANCE_META = "meta_prompted"
PROVENANCE_DETERMINISTIC = "deterministic"

META_PROMPT_FILE = "meta_prompt.txt"
INSPECTOR_PROMPT_FILE = "inspector_prompt.txt"


class PromptError(ValueError):
    pass


@dataclass(frozen=True)
class SeverityScale:
    low: int = 1
    high: int = 10

    def __post_init__(self):
        if self.low >= self.high:
            raise PromptError(f"severity scale low {self.low} must be below high {self.high}")


@dataclass(frozen=True)
class ResponseTemplate:
    """Labels and severity scale of the structured response format."""

    summary_label: str = "Summary"
    hazard_label: str = "Hazard No."
    severity_label: str = "Severity"
    explanation_label: str = "Explanation"
    suggestion_label: str = "Suggestion"
    severity_scale: SeverityScale = SeverityScale()

    def __post_init__(self):
        labels = (
            self.summary_label,
            self.hazard_label,
            self.severity_label,
            self.explanation_label,
            self.suggestion_label,
        )
        if any(not label.strip() for label in labels):
            raise PromptError("response template labels must be non-empty")


@dataclass(frozen=True)
class EngineeredPrompt:
    text: str
    guideline_fingerprint: str
    template_fingerprint: str
    provenance: str

    def __post_init__(self):
        if not self.text.strip():
            raise PromptError("engineered prompt text is empty")
        if self.provenance not in (PROVENANCE_META, PROVENANCE_DETERMINISTIC):
            raise PromptError(f"unknown prompt provenance {self.provenance!r}")


def default_prompts_dir() -> Path:
    """Resolve the prompts directory: env override, repo checkout, then cwd."""
    env = os.environ.get("HAZARDEVAL_PROMPTS_DIR")
    if env:
        return Path(env)
    repo_dir = Path(__file__).resolve().parents[2] / "prompts"
    if repo_dir.is_dir():
        return repo_dir
    return Path("prompts")


def load_prompt_skeleton(name: str, prompts_dir: Path | None = None) -> str:
    path = (prompts_dir or default_prompts_dir()) / name
    try:
        return path.read_text(encoding="utf-8")
    except FileNotFoundError as exc:
        raise PromptError(f"prompt skeleton not found: {path}") from exc


def guideline_fingerprint(gset: GuidelineSet) -> str:
    payload = [[g.id, g.hazard_name, g.conditions] for g in gset.guidelines]
    return _digest(payload)


def template_fingerprint(template: ResponseTemplate) -> str:
    payload = [
        template.summary_label,
        template.hazard_label,
        template.severity_label,
        template.explanation_label,
        template.suggestion_label,
        template.severity_scale.low,
        template.severity_scale.high,
    ]
    return _digest(payload)


def _digest(payload) -> str:
    canonical = json.dumps(payload, ensure_ascii=False, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def template_spec_text(template: ResponseTemplate) -> str:
    """Human-readable specification of the response format, for prompt bodies."""
    scale = template.severity_scale
    none_line = f'{template.summary_label}: No hazards are present.'
    return (
        f"{template.summary_label}: <one-sentence summary of the hazards present>\n"
        f"{template.hazard_label} 1: <hazard name>\n"
        f"{template.severity_label}: <integer from {scale.low} to {scale.high}, "
        f"where {scale.high} is the most severe>\n"
        f"{template.explanation_label}: <why this is a hazard in this scene>\n"
        f"{template.suggestion_label}: <one actionable mitigation>\n"
        "\n"
        f"Repeat the {template.hazard_label} block for every hazard found, numbering "
        "sequentially from 1. If the scene shows no hazards, answer with exactly "
        f'"{none_line}" and no hazard blocks.'
    )


def build_meta_prompt(
    gset: GuidelineSet,
    template: ResponseTemplate,
    prompts_dir: Path | None = None,
) -> str:
    """Instruction text asking a chat model to write the inference prompt."""
    skeleton = load_prompt_skeleton(META_PROMPT_FILE, prompts_dir)
    return skeleton.format(
        guidelines=render_guidelines_text(gset),
        response_format=template_spec_text(template),
    )


def engineer_prompt(
    gset: GuidelineSet,
    template: ResponseTemplate,
    provider,
    params,
    meta_text: str | None = None,
    prompts_dir: Path | None = None,
) -> EngineeredPrompt:
    """Obtain an inference prompt from a chat provider via the meta-prompt.

    The provider's completion text is stored verbatim. Provider errors
    propagate; an empty completion is an error.
    """
    meta = meta_text if meta_text is not None else build_meta_prompt(gset, template, prompts_dir)
    result = provider.complete(meta, image=None, params=params)
    if not result.text.strip():
        raise PromptError("empty engineered prompt returned by provider")
    return EngineeredPrompt(
        text=result.text,
        guideline_fingerprint=guideline_fingerprint(gset),
        template_fingerprint=template_fingerprint(template),
        provenance=PROVENANCE_META,
    )


def deterministic_prompt(
    gset: GuidelineSet,
    template: ResponseTemplate,
    prompts_dir: Path | None = None,
) -> EngineeredPrompt:
    """Offline inference prompt interpolated from the inspector skeleton."""
    skeleton = load_prompt_skeleton(INSPECTOR_PROMPT_FILE, prompts_dir)
    text = skeleton.format(
        guidelines=render_guidelines_text(gset),
        response_format=template_spec_text(template),
    )
    return EngineeredPrompt(
        text=text,
        guideline_fingerprint=guideline_fingerprint(gset),
        template_fingerprint=template_fingerprint(template),
        provenance=PROVENANCE_DETERMINISTIC,
    )
