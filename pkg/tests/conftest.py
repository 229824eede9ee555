import numpy as np
import pytest

from wicksys._backend import backends
from wicksys.multiindex import TruncationPolicy


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def p34():
    return TruncationPolicy(3, 4)


@pytest.fixture(params=sorted(backends()))
def kernels(request):
    """Each available kernel backend in turn."""
    return backends()[request.param]


ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def acceptance(request):
    """Record one pass/fail line per acceptance criterion; printed in the summary."""

    def record(number: int, name: str, ok: bool, detail: str = "") -> bool:
        line = f"[{'PASS' if ok else 'FAIL'}] criterion {number:>2}: {name}" + (f" ({detail})" if detail else "")
        ACCEPTANCE_LINES.append(line)
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
