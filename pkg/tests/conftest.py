import pytest
from hypothesis import settings

from mustring.model import PRESETS, derive_constants
from mustring.spectrum import find_modes

settings.register_profile("default", max_examples=40, deadline=None, derandomize=True)
settings.load_profile("default")


@pytest.fixture(scope="session")
def diagonal():
    return derive_constants(PRESETS["diagonal"])


@pytest.fixture(scope="session")
def baseline():
    return derive_constants(PRESETS["baseline"], branch="upper")


@pytest.fixture(scope="session")
def diagonal_modes(diagonal):
    return find_modes(diagonal, 40)


def pytest_terminal_summary(terminalreporter):
    from test_acceptance import RESULT_LINES

    if RESULT_LINES:
        terminalreporter.section("acceptance criteria")
        for line in RESULT_LINES:
            terminalreporter.write_line(line)
