"""Refresh the committed golden reports for the offline end-to-end run.

Usage: python scripts/update_goldens.py
Rerun whenever the stub synthesizer, fixture dataset, prompt skeletons, or
report formatting intentionally change, and review the diff before committing.
"""

from __future__ import annotations

import shutil
import sys
import tempfile
from pathlib import Path

REPO = Path(__file__).resolve().parents[1]
sys.path.insert(0, str(REPO / "src"))
sys.path.insert(0, str(REPO / "tests"))

from helpers import GOLDEN_DIR, GOLDEN_FILES, golden_pipeline  # noqa: E402


def main():
    GOLDEN_DIR.mkdir(parents=True, exist_ok=True)
    with tempfile.TemporaryDirectory() as tmp:
        tmp_path = Path(tmp)
        paths, calls = golden_pipeline(tmp_path / "cache", tmp_path / "out")
        for fmt, name in GOLDEN_FILES.items():
            shutil.copyfile(paths[fmt], GOLDEN_DIR / name)
            print(f"wrote {GOLDEN_DIR / name}")
    print(f"(pipeline made {calls} stub calls)")


if __name__ == "__main__":
    main()
