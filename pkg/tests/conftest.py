import random

import pytest

import builders


@pytest.fixture
def listing_catalog():
    return builders.listing_catalog()


@pytest.fixture
def rng():
    return random.Random(1234)


# one line per acceptance criterion, printed after the run
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
