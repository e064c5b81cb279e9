import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def sinusoid_csv(tmp_path):
    from pmbsi.datasets import sinusoid
    from pmbsi.series import dump_series

    path = tmp_path / "sinusoid.csv"
    path.write_text(dump_series(sinusoid()))
    return path


@pytest.fixture
def constant_csv(tmp_path):
    path = tmp_path / "constant.csv"
    path.write_text("value\n" + "3.5\n" * 40)
    return path


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
