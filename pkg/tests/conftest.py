import numpy as np
import pytest

from sirpca import synth


@pytest.fixture(scope="session")
def benchmark():
    """The 200x200 rank-10 calibration instance with 1%-noisy side info and d=10 features."""
    return synth.benchmark_instance(seed=2024, side_model="entrywise", d=10)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def small_instance(seed, n1=40, n2=30, r=3, rho=0.05):
    g = np.random.default_rng(seed)
    l0 = g.standard_normal((n1, r)) @ g.standard_normal((r, n2)) / np.sqrt(n1)
    s0 = np.zeros(n1 * n2)
    idx = g.choice(n1 * n2, int(round(rho * n1 * n2)), replace=False)
    s0[idx] = g.choice([-1.0, 1.0], idx.size)
    s0 = s0.reshape(n1, n2)
    w = l0 + 0.01 * g.standard_normal((n1, n2)) * np.abs(l0).mean()
    return l0, s0, l0 + s0, w


ACCEPTANCE = {}


def record(number, title, ok, detail=""):
    ACCEPTANCE[number] = (title, bool(ok), detail)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        title, ok, detail = ACCEPTANCE[number]
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'} [{number}] {title}: {detail}")
