"""Run the whole pipeline offline and print the Markdown report.

Everything is stubbed and cached, so this finishes in seconds and produces the
same bytes every time:

    python scripts/offline_demo.py [out_dir]
"""

from __future__ import annotations

import sys
import tempfile
from pathlib import Path

REPO = Path(__file__).resolve().parents[1]
sys.path.insert(0, str(REPO / "src"))
sys.path.insert(0, str(REPO / "tests"))

from helpers import golden_pipeline  # noqa: E402


def main():
    out_dir = Path(sys.argv[1]) if len(sys.argv) > 1 else Path(tempfile.mkdtemp(prefix="hazardeval-demo-"))
    paths, calls = golden_pipeline(out_dir / "cache", out_dir / "reports")
    print(paths["markdown"].read_text(encoding="utf-8"))
    print(f"(made {calls} stub provider calls; reports under {out_dir / 'reports'})")


if __name__ == "__main__":
    main()
