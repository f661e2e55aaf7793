from __future__ import annotations

import numpy as np
import pytest

from hgpprep.codes import hypergraph_product, repetition_code, star_code, thicken

REP3 = np.array([[1, 1, 0], [0, 1, 1]], dtype=np.uint8)


@pytest.fixture(scope="session")
def surface13():
    """[[13,1,3]] code from rep(3) x rep(3), with logicals."""
    code, layout = hypergraph_product(repetition_code(3), repetition_code(3))
    return code.with_logicals(), layout


@pytest.fixture(scope="session")
def thick13(surface13):
    code, _ = surface13
    thick, layout = thicken(code, repetition_code(3))
    return code, thick, layout


@pytest.fixture(scope="session")
def star13(surface13):
    code, _ = surface13
    thick, layout = thicken(code, star_code(3, 2))
    return code, thick, layout


# acceptance verdicts collected by tests/test_acceptance.py
ACCEPTANCE: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        terminalreporter.write_line(ACCEPTANCE[k])
