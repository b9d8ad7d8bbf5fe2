import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from anadiv import NormWeights, Poly, full_report, make_domain  # noqa: E402

ROOT = Path(__file__).resolve().parents[1]
FX = Poly.from_terms([(1, 0, 1.0)])
REPORT_WEIGHTS = NormWeights(2.0**-6 / 100, 2.0**-6, 6)

_ACCEPTANCE: list[str] = []


@pytest.fixture(scope="session")
def disk():
    return make_domain("disk")


@pytest.fixture(scope="session")
def ellipse():
    return make_domain("ellipse(2,1)")


@pytest.fixture(scope="session")
def fx_reports():
    """Full f = x reports on the disk and on ellipse(2,1), computed once."""
    return {name: full_report(make_domain(name), FX, REPORT_WEIGHTS) for name in ("disk", "ellipse(2,1)")}


@pytest.fixture
def acceptance_line():
    """Record one pass/fail line per acceptance criterion; echoed inline and
    again in the terminal summary."""

    def record(number: int, title: str, passed: bool, detail: str = ""):
        line = f"[{'PASS' if passed else 'FAIL'}] criterion {number:2d}: {title}" + (f" -- {detail}" if detail else "")
        _ACCEPTANCE.append(line)
        print("\n" + line)
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_ACCEPTANCE, key=lambda s: int(s.split("criterion")[1].split(":")[0])):
            terminalreporter.write_line(line)
