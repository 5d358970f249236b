"""Regenerate the fixture images and dataset under fixtures/.

Images are tiny deterministic PNGs (pure stdlib encoder); the dataset pairs
each image with a hand-written, already-approved ground-truth report. Rerun
after editing the ground-truth texts below:

    python scripts/make_fixtures.py
"""

from __future__ import annotations

import json
import struct
import sys
import zlib
from pathlib import Path

REPO = Path(__file__).resolve().parents[1]
sys.path.insert(0, str(REPO / "src"))

from hazardeval.reportparse import parse_report, report_to_dict  # noqa: E402

IMAGE_DIR = REPO / "fixtures" / "images"
DATASET_PATH = REPO / "fixtures" / "dataset.jsonl"
SIZE = 16


def _chunk(tag: bytes, data: bytes) -> bytes:
    return (
        struct.pack(">I", len(data))
        + tag
        + data
        + struct.pack(">I", zlib.crc32(tag + data) & 0xFFFFFFFF)
    )


def write_png(path: Path, index: int):
    def pixel(x: int, y: int) -> bytes:
        r = (index * 37 + x * 16) % 256
        g = (index * 59 + y * 16) % 256
        b = (index * 83 + (x ^ y) * 16) % 256
        return bytes((r, g, b))

    raw = b"".join(
        b"\x00" + b"".join(pixel(x, y) for x in range(SIZE)) for y in range(SIZE)
    )
    ihdr = struct.pack(">IIBBBBB", SIZE, SIZE, 8, 2, 0, 0, 0)
    payload = (
        b"\x89PNG\r\n\x1a\n"
        + _chunk(b"IHDR", ihdr)
        + _chunk(b"IDAT", zlib.compress(raw, 9))
        + _chunk(b"IEND", b"")
    )
    path.write_bytes(payload)


# Ground-truth texts in the structured response format; parsed below so the
# dataset carries canonical JSON.
GROUND_TRUTHS = [
    """Summary: Two workers near an unshored trench without edge protection.
Hazard No. 1: Unshored trench
Severity: 8
Explanation: The trench walls are vertical soil with no shoring, so a collapse could bury anyone working at the bottom.
Suggestion: Install trench boxes or slope the walls back before anyone re-enters.
Hazard No. 2: Missing edge barrier
Severity: 6
Explanation: Workers walk along the open edge, so a slip would mean a fall into the excavation.
Suggestion: Fence the trench edge and mark a keep-back line.""",
    """Summary: Worker on the upper scaffold level without a harness.
Hazard No. 1: Unprotected work at height
Severity: 9
Explanation: The worker stands on planks two levels up with no harness or guardrail on the open side.
Suggestion: Stop the task until guardrails are fitted and the worker ties off to an anchor point.""",
    """Summary: No hazards are present.""",
    """Summary: Crew member without a helmet beside the mixer; cables across the walkway.
Hazard No. 1: Missing helmet
Severity: 7
Explanation: One crew member works bareheaded beside the running mixer where splashes and dropped tools are likely.
Suggestion: Keep spare helmets at the gate and turn away anyone without one.
Hazard No. 2: Trailing power cables
Severity: 5
Explanation: Extension cables cross the only walkway and are already scuffed.
Suggestion: Re-route the cables overhead or under ramped covers.""",
    """Summary: Grinder in use with sparks near stored fuel cans.
Hazard No. 1: Sparks near flammables
Severity: 9
Explanation: The grinding sparks land within a metre of plastic fuel cans staged for the generator.
Suggestion: Move the fuel store away and set up a hot-work screen before grinding resumes.
Hazard No. 2: Missing face shield
Severity: 6
Explanation: The operator wears glasses only, and the wheel has no guard fitted.
Suggestion: Refit the wheel guard and issue a face shield for grinding tasks.""",
    """Summary: Ladder leaning at a shallow angle on loose gravel.
Hazard No. 1: Unstable ladder setup
Severity: 7
Explanation: The ladder foot sits on loose gravel at a shallow angle, so it can kick out under load.
Suggestion: Re-seat the ladder on firm ground at the correct angle and have a second worker foot it.""",
    """Summary: Excavator slewing over workers placing formwork.
Hazard No. 1: Load passing overhead
Severity: 8
Explanation: The excavator bucket swings directly over the formwork crew with nobody watching the lift.
Suggestion: Agree a slewing zone that keeps loads clear of the crew and appoint a spotter.
Hazard No. 2: No high-visibility vests
Severity: 5
Explanation: Two of the formwork crew wear dark jackets and are hard to pick out from the cab.
Suggestion: Enforce high-visibility vests for everyone inside the excavation area.""",
    """Summary: No hazards are present.""",
    """Summary: Debris and offcut timber blocking the stair access.
Hazard No. 1: Blocked escape route
Severity: 6
Explanation: Offcut timber with protruding nails covers the stair landing that doubles as the escape route.
Suggestion: Clear the landing now and add a skip at the stair base for offcuts.
Hazard No. 2: Protruding nails
Severity: 4
Explanation: The discarded boards still carry nails facing upward where people step.
Suggestion: Pull or bend the nails before boards go to the skip.""",
    """Summary: Work continuing in heavy snow with poor visibility of the crane.
Hazard No. 1: Poor visibility during lifting
Severity: 7
Explanation: Falling snow hides the crane hook from the slinger, so loads move unseen over the crew.
Suggestion: Pause lifting until visibility returns and agree radio-only load movements.
Hazard No. 2: Icy access boards
Severity: 6
Explanation: The scaffold access boards carry packed snow and ice.
Suggestion: Grit and clear the boards before each shift and fit toe guards.""",
]


def main():
    IMAGE_DIR.mkdir(parents=True, exist_ok=True)
    lines = []
    for i, text in enumerate(GROUND_TRUTHS):
        name = f"site_{i:03d}.png"
        write_png(IMAGE_DIR / name, i)
        report, issues = parse_report(text)
        problems = [issue for issue in issues if issue.kind != "no_hazard_blocks"]
        if problems:
            raise SystemExit(f"ground truth {i} did not parse cleanly: {problems}")
        lines.append(
            json.dumps(
                {
                    "record_id": f"site-{i:03d}",
                    "image_ref": f"images/{name}",
                    "ground_truth": report_to_dict(report),
                    "review_status": "approved",
                    "failure_labels": [],
                },
                ensure_ascii=False,
            )
        )
    DATASET_PATH.write_text("\n".join(lines) + "\n", encoding="utf-8")
    print(f"wrote {len(GROUND_TRUTHS)} images to {IMAGE_DIR}")
    print(f"wrote {DATASET_PATH}")


if __name__ == "__main__":
    main()
