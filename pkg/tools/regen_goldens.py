"""Regenerate tests/golden/*.json from the built-in fixtures (seed 7).

Run after an intentional change to the numerics, then review the diff and
update GOLDEN_DIGESTS in tests/test_report.py.
"""

import hashlib
import pathlib
import sys

from gencvx.config import AnalysisConfig
from gencvx.fixtures import fixture_names
from gencvx.report import run_analysis, to_json

OUT = pathlib.Path(__file__).resolve().parent.parent / "tests" / "golden"
SEED = 7


def main() -> int:
    OUT.mkdir(parents=True, exist_ok=True)
    for name in fixture_names():
        text = to_json(run_analysis(AnalysisConfig(seed=SEED, fixture=name)))
        (OUT / f"{name}.json").write_text(text, encoding="utf-8")
        print(f"{name}: sha256 {hashlib.sha256(text.encode()).hexdigest()}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
