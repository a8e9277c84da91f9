import numpy as np
import pytest

from cccbvp import kernels


@pytest.fixture(params=["jit", "vec"])
def backend(request, monkeypatch):
    """Route the kernel wrappers through one backend for the duration of a test."""
    monkeypatch.setattr(kernels, "_active", getattr(kernels, request.param))
    return request.param


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


CRITERIA = {}


@pytest.fixture
def criterion():
    """Record one acceptance verdict: criterion(number, title, checks) with checks = [(ok, text), ...]."""

    def record(number, title, checks):
        ok = all(c for c, _ in checks)
        failed = [t for c, t in checks if not c]
        line = f"criterion {number}: {'PASS' if ok else 'FAIL'}  {title}"
        if failed:
            line += "  [" + "; ".join(failed) + "]"
        CRITERIA[number] = line
        print(line)
        assert ok, line

    return record


def pytest_terminal_summary(terminalreporter):
    if CRITERIA:
        terminalreporter.section("acceptance criteria")
        for number in sorted(CRITERIA):
            terminalreporter.write_line(CRITERIA[number])
