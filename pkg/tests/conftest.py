import contextlib
import time

import pytest

_LINES: list[str] = []


class _Verdict:
    def __init__(self):
        self.detail = ""


@pytest.fixture
def criterion():
    """Context manager recording one PASS/FAIL line per acceptance criterion."""

    @contextlib.contextmanager
    def record(number: int, title: str):
        v = _Verdict()
        t0 = time.perf_counter()
        try:
            yield v
        except BaseException as exc:
            line = f"criterion {number} FAIL  {title}: {type(exc).__name__}: {str(exc).splitlines()[0] if str(exc) else ''}"
            _LINES.append(line)
            print(line)
            raise
        line = f"criterion {number} PASS  {title}: {v.detail} ({time.perf_counter() - t0:.1f} s)"
        _LINES.append(line)
        print(line)

    return record


def pytest_terminal_summary(terminalreporter):
    if _LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_LINES, key=lambda s: int(s.split()[1])):
            terminalreporter.write_line(line)
