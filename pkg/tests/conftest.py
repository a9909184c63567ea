from __future__ import annotations

import pytest

_criteria: dict[int, str] = {}


@pytest.fixture
def criterion():
    """Record a PASS/FAIL line for an acceptance criterion; returns ``ok``."""

    def record(number: int, title: str, ok: bool, detail: str) -> bool:
        _criteria[number] = f"criterion {number}: {'PASS' if ok else 'FAIL'}  {title}  [{detail}]"
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_criteria):
        terminalreporter.write_line(_criteria[number])
