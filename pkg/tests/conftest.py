import json

import pytest

from ctxattack.backends.stubs import demo_suite

ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def criterion():
    """Record one PASS/FAIL line, print it, and fail the test on FAIL."""

    def report(number: int, ok: bool, detail: str):
        line = f"[{'PASS' if ok else 'FAIL'}] criterion {number:>2}: {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)
        assert ok, line

    return report


@pytest.fixture
def suite():
    return demo_suite()


@pytest.fixture
def review_file(tmp_path):
    rows = [
        {"id": "r1", "text": "The food was great and the staff were friendly", "label": 1},
        {"id": "r2", "text": "The food was great", "label": 1},
        {"id": "r3", "text": "I loved this place", "label": 1},
        {"id": "r4", "text": "The staff were rude and the food was bland", "label": 0},
        {"id": "r5", "text": "The food was awful", "label": 1},
        {"id": "r6", "text": "Nice place , tasty food", "label": 1},
    ]
    path = tmp_path / "reviews.jsonl"
    path.write_text("".join(json.dumps(r) + "\n" for r in rows), encoding="utf-8")
    return path
