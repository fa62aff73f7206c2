import numpy as np
import pytest

from gossipavg.graph import generate_regular

_ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def criterion():
    """Record one acceptance line; assert after recording so failures still report."""

    def record(label: str, ok: bool, detail: str):
        _ACCEPTANCE_LINES.append(f"[{'PASS' if ok else 'FAIL'}] {label}: {detail}")
        print(_ACCEPTANCE_LINES[-1])
        assert ok, f"{label}: {detail}"

    return record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def k4():
    return generate_regular(4, 3, 1)


@pytest.fixture(scope="session")
def g50():
    return generate_regular(50, 3, 0)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
