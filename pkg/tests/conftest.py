import csv
from pathlib import Path

import pytest

from prevbounds.ingest import read_counties

ROOT = Path(__file__).resolve().parent.parent
DATA = ROOT / "data" / "austria_dec2020.csv"
CONFIG = ROOT / "data" / "austria_config.json"
GOLDEN = Path(__file__).resolve().parent / "golden" / "published_tables.csv"

_ACCEPTANCE = []


@pytest.fixture
def acceptance_log():
    """Record one line per acceptance criterion; printed in the terminal summary."""

    def record(name, ok, detail=""):
        _ACCEPTANCE.append(f"{'PASS' if ok else 'FAIL'}  {name}" + (f"  ({detail})" if detail else ""))
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def austria_dataset():
    return read_counties(DATA)


@pytest.fixture(scope="session")
def published():
    with open(GOLDEN, encoding="utf-8", newline="") as fh:
        return {row["name"]: row for row in csv.DictReader(fh)}
