import warnings
from pathlib import Path

import pytest

from maskner.backend import StubBackend
from maskner.corpus import parse_conll
from maskner.lexicon import builtin_lexicon

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"
GOLDENS = Path(__file__).resolve().parent / "goldens"

MUNICH_PROMPT = "I will visit Munich next week Munich is a [MASK]."
MUNICH_TOP5 = {
    "city": 0.43,
    "success": 0.17,
    "democracy": 0.09,
    "capital": 0.08,
    "dream": 0.05,
}


@pytest.fixture
def munich_dataset():
    return parse_conll((FIXTURES / "munich.conll").read_text(), source="munich.conll").dataset


@pytest.fixture
def munich_backend():
    return StubBackend({MUNICH_PROMPT: MUNICH_TOP5})


@pytest.fixture
def table_lexicon():
    return builtin_lexicon()


@pytest.fixture
def service_client():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        from starlette.testclient import TestClient

        from maskner.service.app import create_app

        with TestClient(create_app()) as client:
            yield client


# The gate below prints one verdict line per acceptance check at the end of a
# run, so a plain `pytest` invocation shows the scoreboard without digging
# through the dots.
_acceptance: list[tuple[str, str]] = []


def pytest_runtest_logreport(report):
    if report.when != "call" or "test_acceptance.py" not in report.nodeid:
        return
    name = report.nodeid.split("::")[-1]
    _acceptance.append((name, report.outcome))


def pytest_terminal_summary(terminalreporter):
    if not _acceptance:
        return
    terminalreporter.write_sep("-", "acceptance checks")
    for name, outcome in _acceptance:
        verdict = "PASS" if outcome == "passed" else "FAIL"
        terminalreporter.write_line(f"{verdict}  {name}")
