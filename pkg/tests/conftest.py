from __future__ import annotations

import numpy as np
import pytest

from dbotsw import load_ucr


@pytest.fixture(scope="session")
def gunpoint():
    return load_ucr("GunPoint", "train"), load_ucr("GunPoint", "test")


@pytest.fixture(scope="session")
def coffee():
    return load_ucr("Coffee", "train"), load_ucr("Coffee", "test")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    import sys

    module = sys.modules.get("tests.test_acceptance")
    lines = getattr(module, "LINES", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
