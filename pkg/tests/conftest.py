from pathlib import Path

import numpy as np
import pytest

from disco import load_csv

FIXTURES = Path(__file__).parent / "fixtures"
GRAVITY_CSV = FIXTURES / "gravity.csv"
IRIS_CSV = FIXTURES / "iris.csv"
IRIS_RESPONSE = ["SL", "SW", "PL", "PW"]

_acceptance_lines = []


def record_criterion(number, name, ok, detail=""):
    _acceptance_lines.append(f"[{'PASS' if ok else 'FAIL'}] criterion {number:>2}: {name}" + (f"  ({detail})" if detail else ""))


def pytest_terminal_summary(terminalreporter):
    if _acceptance_lines:
        terminalreporter.section("acceptance criteria")
        for line in _acceptance_lines:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def gravity():
    return load_csv(GRAVITY_CSV, ["g"], ["series"])


@pytest.fixture(scope="session")
def iris():
    return load_csv(IRIS_CSV, IRIS_RESPONSE, ["Species"])


@pytest.fixture
def rng():
    return np.random.default_rng(20091215)
