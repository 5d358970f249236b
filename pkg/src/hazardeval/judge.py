"""Blind rubric judging of a predicted assessment against ground truth.

The judge model sees only two neutrally labeled texts and the rubric from
prompts/judge_rubric.txt; it returns strict JSON with completeness, accuracy,
and clarity scored 1-5, which normalize to a single value in [0.2, 1.0].
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from pathlib import Path

from .prompting import load_prompt_skeleton

JUDGE_RUBRIC_FILE = "judge_rubric.txt"
CRITERIA = ("completeness", "accuracy", "clarity")
SCORE_MIN, SCORE_MAX = 1, 5


class JudgeError(ValueError):
    pass


@dataclass(frozen=True)
class JudgeScores:
    completeness: int
    accuracy: int
    clarity: int

    def __post_init__(self):
        for name in CRITERIA:
            value = getattr(self, name)
            if not isinstance(value, int) or isinstance(value, bool) or not (SCORE_MIN <= value <= SCORE_MAX):
                raise JudgeError(f"{name} score {value!r} outside [{SCORE_MIN}, {SCORE_MAX}]")


def build_judge_prompt(predicted: str, ground_truth: str, prompts_dir: Path | None = None) -> str:
    """Rubric prompt presenting both texts under neutral labels."""
    if not predicted.strip():
        raise JudgeError("predicted text is empty")
    if not ground_truth.strip():
        raise JudgeError("ground truth text is empty")
    skeleton = load_prompt_skeleton(JUDGE_RUBRIC_FILE, prompts_dir)
    return skeleton.format(ground_truth=ground_truth, prediction=predicted)


_OBJECT_START = re.compile(r"\{")


def parse_judge_output(text: str) -> JudgeScores:
    """Extract the first JSON object carrying all three criterion scores."""
    if not text.strip():
        raise JudgeError("judge output is empty")
    decoder = json.JSONDecoder()
    last_error = "no JSON object found in judge output"
    for match in _OBJECT_START.finditer(text):
        try:
            payload, _ = decoder.raw_decode(text, match.start())
        except json.JSONDecodeError:
            continue
        if not isinstance(payload, dict):
            continue
        missing = [key for key in CRITERIA if key not in payload]
        if missing:
            last_error = f"judge output object is missing {missing}"
            continue
        return JudgeScores(
            completeness=_check_score("completeness", payload["completeness"]),
            accuracy=_check_score("accuracy", payload["accuracy"]),
            clarity=_check_score("clarity", payload["clarity"]),
        )
    raise JudgeError(last_error)


def _check_score(name: str, value) -> int:
    if not isinstance(value, int) or isinstance(value, bool):
        raise JudgeError(f"{name} score {value!r} is not an integer")
    if not (SCORE_MIN <= value <= SCORE_MAX):
        raise JudgeError(f"{name} score {value} outside [{SCORE_MIN}, {SCORE_MAX}]")
    return value


def normalized_score(scores: JudgeScores) -> float:
    """Criterion sum over (criterion count x best score): maps to [0.2, 1.0]."""
    return (scores.completeness + scores.accuracy + scores.clarity) / (len(CRITERIA) * SCORE_MAX)


def judge_sample(
    provider,
    params,
    predicted: str,
    ground_truth: str,
    prompts_dir: Path | None = None,
) -> float:
    """Run one blind judgment end to end; raises JudgeError on unusable output."""
    prompt = build_judge_prompt(predicted, ground_truth, prompts_dir)
    result = provider.complete(prompt, image=None, params=params)
    scores = parse_judge_output(result.text)
    return normalized_score(scores)
