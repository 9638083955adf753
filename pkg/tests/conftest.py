import numpy as np
import pytest
from hypothesis import settings

from wfusion.qcore import PhotonRegister, Label, Site, from_vector

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")

_ACCEPTANCE = []


def random_state(n, seed):
    rng = np.random.default_rng(seed)
    vec = rng.normal(size=2 ** n) + 1j * rng.normal(size=2 ** n)
    vec /= np.linalg.norm(vec)
    reg = PhotonRegister(tuple(Label(Site.ALICE_KEPT, i) for i in range(n)))
    return from_vector(vec, reg)


def random_unitary(seed):
    rng = np.random.default_rng(seed)
    z = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


@pytest.fixture
def criterion(request):
    """Record one acceptance criterion; printed as a pass/fail line at the end."""

    def record(name, passed, detail=""):
        _ACCEPTANCE.append((name, bool(passed), detail))
        assert passed, f"{name}: {detail}"

    return record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name, passed, detail in _ACCEPTANCE:
        terminalreporter.write_line(f"[{'PASS' if passed else 'FAIL'}] {name}  {detail}")
