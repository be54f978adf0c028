import numpy as np
import pytest

from lorentz.core import FiniteLorentzianSpace, chain_tau

_ACCEPTANCE = {}


@pytest.fixture
def acceptance():
    """Record ``(criterion, ok, detail)`` for the summary printed at the end of the run."""
    def record(k, ok, detail=""):
        _ACCEPTANCE[k] = (bool(ok), detail)
        print(f"criterion {k}: {'PASS' if ok else 'FAIL'} {detail}")
    return record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance")
    for k in sorted(_ACCEPTANCE):
        ok, detail = _ACCEPTANCE[k]
        terminalreporter.write_line(f"criterion {k}: {'PASS' if ok else 'FAIL'}  {detail}")


def chain_space(n, links, coords=None):
    tau, reach = chain_tau(n, links)
    return FiniteLorentzianSpace(leq=reach, tau=tau, coords=coords, links=tuple(links))


@pytest.fixture
def diamond4():
    # p < a, b < q with a, b spacelike; tau(p, q) = 2
    links = [(0, 1, 1.0), (0, 2, 1.0), (1, 3, 1.0), (2, 3, 1.0)]
    return chain_space(4, links, coords=np.array([[0, 0], [1, -0.5], [1, 0.5], [2, 0]], float))
