import warnings

import numpy as np
import pytest

warnings.filterwarnings("ignore", message="The TBB threading layer")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def simulate_arma(phi=(), theta=(), n=1000, c=0.0, sigma=1.0, seed=0, burn=500):
    """ARMA simulation by direct recursion (independent of the estimator's filter code)."""
    r = np.random.default_rng(seed)
    e = r.normal(0.0, sigma, n + burn)
    x = np.zeros(n + burn)
    for t in range(n + burn):
        v = c + e[t]
        for i, ph in enumerate(phi):
            if t - 1 - i >= 0:
                v += ph * x[t - 1 - i]
        for j, th in enumerate(theta):
            if t - 1 - j >= 0:
                v += th * e[t - 1 - j]
        x[t] = v
    return x[burn:]


ACCEPTANCE_LINES = []


def record_acceptance(number, passed, detail):
    """Remember one acceptance outcome; printed in the terminal summary."""
    status = "PASS" if passed is True else ("SKIP" if passed is None else "FAIL")
    line = f"criterion {number:>2}: {status}  {detail}"
    ACCEPTANCE_LINES.append((number, line))
    print(line)
    return line


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for _, line in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(line)
