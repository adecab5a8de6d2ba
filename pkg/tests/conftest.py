import sys

import pytest

import criteria


@pytest.fixture
def fast_switching():
    """Shrink the interpreter's thread switch interval so threaded tests
    interleave aggressively; restored afterwards."""
    old = sys.getswitchinterval()
    sys.setswitchinterval(1e-5)
    yield
    sys.setswitchinterval(old)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not criteria.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in criteria.summary_lines():
        terminalreporter.write_line(line)
