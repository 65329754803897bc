import pytest

from genauto.algebra import Mode, make_automaton

from _helpers import ACCEPTANCE_LINES


@pytest.fixture
def tft_automaton():
    return make_automaton(
        ("C", "D"),
        [1, 0],
        {"C": [[1, 0], [1, 0]], "D": [[0, 1], [0, 1]]},
        [1, 0],
        mode=Mode.STOCHASTIC,
    )


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
