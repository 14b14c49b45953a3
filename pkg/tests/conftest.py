import numpy as np
import pytest

from stegokey.workbench import synth_cover


@pytest.fixture(scope="session")
def cover():
    """320x480 synthetic cover, residual sigma about 1.6."""
    return synth_cover(480, 320, texture_sigma=1.5, gen_seed=11)


@pytest.fixture(scope="session")
def small_cover():
    return synth_cover(64, 48, texture_sigma=2.0, gen_seed=5)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


_ACCEPTANCE = []


@pytest.fixture(scope="session")
def acceptance_log():
    return _ACCEPTANCE


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for cid, ok, detail in sorted(_ACCEPTANCE, key=lambda x: int(x[0][1:])):
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'} {cid}: {detail}")
