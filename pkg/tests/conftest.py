import time
from contextlib import contextmanager

import pytest

_LINES = pytest.StashKey[list]()


def pytest_configure(config):
    config.stash[_LINES] = []


@pytest.fixture
def criterion(request):
    """Context manager that times a block and records one PASS/FAIL line for it."""
    lines = request.config.stash[_LINES]

    @contextmanager
    def record(label, budget):
        start = time.perf_counter()
        status, note = "PASS", ""
        try:
            yield
        except BaseException as exc:
            status, note = "FAIL", f" ({type(exc).__name__}: {str(exc).splitlines()[0] if str(exc) else ''})"
            raise
        finally:
            elapsed = time.perf_counter() - start
            if status == "PASS" and elapsed > budget:
                status, note = "FAIL", f" (runtime {elapsed:.2f}s exceeds {budget}s)"
            line = f"[{status}] {label} [{elapsed:.2f}s / {budget}s]{note}"
            lines.append(line)
            print(line)
        assert elapsed <= budget, f"runtime {elapsed:.2f}s exceeds {budget}s"

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(_LINES, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
