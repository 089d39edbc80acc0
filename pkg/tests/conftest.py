import numpy as np
import pytest

_CRITERIA = {}


@pytest.fixture
def criterion():
    """Record an acceptance outcome; lines are echoed in the terminal summary."""

    def record(number, title, ok, detail=""):
        line = f"criterion {number:>2} {'PASS' if ok else 'FAIL'}: {title}"
        if detail:
            line += f" [{detail}]"
        _CRITERIA.setdefault(number, []).append(line)
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        for line in _CRITERIA[number]:
            terminalreporter.write_line(line)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
