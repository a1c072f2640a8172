import numpy as np
import pytest

from twistbethe.model import ModelSpec, SingularDecomposition, RootSet
from twistbethe.twist import expand_series


@pytest.fixture(scope="session")
def pair4():
    spec = ModelSpec(sites=4, magnons=2, digits=40)
    return spec, SingularDecomposition(spec.string_values(), RootSet(()))


@pytest.fixture(scope="session")
def series4(pair4):
    spec, dec = pair4
    return expand_series(spec, dec, 4)


def explicit_pair_state(n: int) -> np.ndarray:
    """sum_k (-1)^k S_k^- S_{k+1}^- |0>, periodic, in the bitmask basis."""
    v = np.zeros(1 << n, dtype=complex)
    for k in range(1, n + 1):
        a, b = k - 1, k % n
        v[(1 << a) | (1 << b)] += (-1) ** k
    return v


def pytest_terminal_summary(terminalreporter):
    acc = __import__("sys").modules.get("test_acceptance")
    if acc is None or not acc.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for check in acc.CHECKS:
        if check.label in acc.RESULTS:
            ok, detail = acc.RESULTS[check.label]
            terminalreporter.write_line(f"criterion {check.label}: {'PASS' if ok else 'FAIL'} ({detail})")
