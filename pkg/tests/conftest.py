import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from qinstr.qstate import random_dm, random_unitary

settings.register_profile("default", max_examples=40, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

seeds = st.integers(min_value=0, max_value=2**32 - 1)
angles = st.floats(min_value=-np.pi, max_value=np.pi, allow_nan=False)


def assert_dm(m, tol=1e-9):
    """Shared validator: Hermitian, unit trace, positive semidefinite."""
    m = np.asarray(m)
    assert m.shape[0] == m.shape[1]
    assert np.max(np.abs(m - m.conj().T)) < tol
    assert abs(np.trace(m) - 1) < tol
    assert np.linalg.eigvalsh((m + m.conj().T) / 2)[0] > -tol


def dm_from_seed(seed, dim=2, rank=None):
    return random_dm(np.random.default_rng(seed), dim, rank)


def unitary_from_seed(seed, dim=2):
    return random_unitary(np.random.default_rng(seed), dim)


def unit_vector(seed):
    v = np.random.default_rng(seed).normal(size=3)
    return v / np.linalg.norm(v)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


_ACCEPTANCE = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(n): numbered end-to-end acceptance criterion")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    mark = item.get_closest_marker("acceptance")
    rep = outcome.get_result()
    if mark is None or (rep.when != "call" and rep.passed):
        return
    n = mark.args[0]
    ok = rep.passed and _ACCEPTANCE.get(n, (True,))[0]
    _ACCEPTANCE[n] = (ok, item.name, rep.duration if rep.when == "call" else 0.0)


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_ACCEPTANCE):
        ok, name, dt = _ACCEPTANCE[n]
        terminalreporter.write_line(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {name}  ({dt:.2f} s)")
