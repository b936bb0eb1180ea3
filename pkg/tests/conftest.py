from __future__ import annotations

import cmath
import math

import pytest
from hypothesis import HealthCheck, settings

settings.register_profile("hochsplit", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("hochsplit")

RADII = (0.0, 0.25, 0.5, 0.75, 0.9, 0.99)
PHASES = 8


def grid_points():
    """The default 48-point lambda grid."""
    return [r * cmath.exp(2j * math.pi * k / PHASES) for r in RADII for k in range(PHASES)]


# one line per acceptance criterion, filled in by tests/test_acceptance.py
ACCEPTANCE: dict[int, list[tuple[bool, str]]] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        parts = ACCEPTANCE[k]
        ok = all(p for p, _ in parts)
        detail = "; ".join(d for _, d in parts)
        terminalreporter.write_line(f"criterion {k}: {'PASS' if ok else 'FAIL'} | {detail}")


@pytest.fixture
def record():
    def _record(k: int, ok: bool, detail: str):
        ACCEPTANCE.setdefault(k, []).append((bool(ok), detail))
        print(f"criterion {k}: {'PASS' if ok else 'FAIL'} | {detail}")
    return _record
