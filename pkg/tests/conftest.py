from pathlib import Path

import pytest

from suite_helpers import ACCEPTANCE_LINES

DATA_DIR = Path(__file__).parent / "data"


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def data_dir() -> Path:
    return DATA_DIR


@pytest.fixture(scope="session")
def graph_corpus_path() -> Path:
    return DATA_DIR / "graphs50.penman"


@pytest.fixture(scope="session")
def corpus_path() -> Path:
    return DATA_DIR / "synthetic_corpus.jsonl"


@pytest.fixture(scope="session")
def corpus_records(corpus_path):
    from amrfact import ingest

    return ingest(corpus_path).records
