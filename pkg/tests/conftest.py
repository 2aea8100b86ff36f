from pathlib import Path

import numpy as np
import pytest

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def fixtures_dir():
    return FIXTURES


class _Criterion:
    def __init__(self, results, number, title):
        self.results = results
        self.number = number
        self.title = title
        self.detail = ""

    def __enter__(self):
        return self

    def __exit__(self, exc_type, exc, tb):
        status = "PASS" if exc_type is None else "FAIL"
        detail = self.detail if exc_type is None else f"{self.detail} {exc_type.__name__}: {exc}".strip()
        line = f"[{status}] criterion {self.number:2d}: {self.title}" + (f" ({detail})" if detail else "")
        self.results[self.number] = line
        print(line)
        return False


_ACCEPTANCE = {}


@pytest.fixture
def criterion():
    def make(number, title):
        return _Criterion(_ACCEPTANCE, number, title)
    return make


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for k in sorted(_ACCEPTANCE):
            terminalreporter.write_line(_ACCEPTANCE[k].splitlines()[0])
