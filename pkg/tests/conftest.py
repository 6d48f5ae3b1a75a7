import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

# criterion id -> (passed, detail), filled by test_acceptance.py
ACCEPTANCE: dict[str, tuple[bool, str]] = {}


@pytest.fixture
def rng():
    return np.random.default_rng(20091)


@pytest.fixture
def criterion():
    def record(cid: str, passed: bool, detail: str) -> bool:
        ACCEPTANCE[cid] = (bool(passed), detail)
        print(f"[{'PASS' if passed else 'FAIL'}] {cid}: {detail}")
        return bool(passed)

    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for cid in sorted(ACCEPTANCE, key=lambda c: (int(c[1:].split(".")[0].rstrip("ab")), c)):
        passed, detail = ACCEPTANCE[cid]
        terminalreporter.write_line(f"{'PASS' if passed else 'FAIL'}  {cid:<5} {detail}")
