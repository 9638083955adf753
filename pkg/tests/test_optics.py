import itertools
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from conftest import random_state
from wfusion.exact import exact_basis, exact_w_state
from wfusion.optics import (
    DetectorArm,
    DiagonalOutcome,
    apply_fredkin,
    apply_hwp,
    project_diagonal,
    route_pbs,
    split_by_occupancy,
)
from wfusion.qcore import Label, Polarization, Site, basis_state, parse_ket

H, V = Polarization.H, Polarization.V
M1, M2, ANC = Label(Site.MODE1, 0), Label(Site.MODE2, 0), Label(Site.ANCILLA, 0)
A0 = Label(Site.ALICE_KEPT, 0)


def test_hwp_flips():
    assert dict(apply_hwp(basis_state("H", [A0]), A0).items()) == {(V,): 1}
    assert dict(apply_hwp(basis_state("V", [A0]), A0).items()) == {(H,): 1}


def test_hwp_leaves_diagonal_state():
    plus = basis_state("H", [A0])
    plus = type(plus)(plus.register, {(H,): 1 / math.sqrt(2), (V,): 1 / math.sqrt(2)})
    out = apply_hwp(plus, A0)
    assert out.amplitude("H") == pytest.approx(1 / math.sqrt(2))
    assert out.amplitude("V") == pytest.approx(1 / math.sqrt(2))


def test_hwp_unknown_label():
    with pytest.raises(ValueError):
        apply_hwp(basis_state("H", [A0]), M1)


def _brute_fredkin(bits):
    c, t1, t2 = bits
    return (c, t2, t1) if c == 1 else (c, t1, t2)


@pytest.mark.parametrize("bits", list(itertools.product((0, 1), repeat=3)))
def test_fredkin_truth_table(bits):
    ket = "".join("HV"[b] for b in bits)
    out = apply_fredkin(basis_state(ket, [M1, M2, ANC]), M1, M2, ANC)
    assert dict(out.items()) == {_brute_fredkin(bits): 1}


@pytest.mark.parametrize("src,dst", [("VVH", "VHV"), ("HVH", "HVH"), ("HHH", "HHH"), ("VHH", "VHH")])
def test_fredkin_protocol_inputs(src, dst):
    out = apply_fredkin(basis_state(src, [M1, M2, ANC]), M1, M2, ANC)
    assert dict(out.items()) == {parse_ket(dst): 1}


def test_fredkin_needs_distinct_labels():
    s = basis_state("HHH", [M1, M2, ANC])
    with pytest.raises(ValueError):
        apply_fredkin(s, M1, M1, ANC)


@given(st.integers(3, 10), st.integers(0, 2**32 - 1))
def test_fredkin_and_hwp_unitary(n, seed):
    s = random_state(n, seed)
    labs = s.register.labels
    rng = np.random.default_rng(seed)
    c, t1, t2 = rng.choice(n, size=3, replace=False)
    out = apply_fredkin(s, labs[c], labs[t1], labs[t2])
    assert abs(out.norm_sq() - 1) < 1e-12
    back = apply_fredkin(out, labs[c], labs[t1], labs[t2])
    for ket, amp in s.items():
        assert abs(back.amplitude(ket) - amp) < 1e-12
    assert abs(apply_hwp(s, labs[t1]).norm_sq() - 1) < 1e-12


def test_pbs_routes():
    assert route_pbs(Site.MODE1, H) is DetectorArm.D1
    assert route_pbs(Site.MODE1, V) is DetectorArm.D2
    assert route_pbs(Site.MODE2, H) is DetectorArm.D2
    assert route_pbs(Site.MODE2, V) is DetectorArm.D1


def test_pbs_bad_port():
    with pytest.raises(ValueError):
        route_pbs(Site.ANCILLA, H)


@pytest.mark.parametrize("p1,p2", list(itertools.product((H, V), repeat=2)))
def test_pbs_coincidence_rule(p1, p2):
    # Post-HWP equal polarizations split across arms; orthogonal ones bunch.
    arms = {route_pbs(Site.MODE1, p1), route_pbs(Site.MODE2, p2)}
    assert (len(arms) == 2) == (p1 == p2)


def test_project_h_on_d():
    res, w = project_diagonal(basis_state("H", [A0]), A0, DiagonalOutcome.D)
    assert res.size == 0
    assert w == pytest.approx(0.5, abs=1e-15)


def test_project_v_on_dbar():
    res, w = project_diagonal(basis_state("V", [A0]), A0, DiagonalOutcome.DBAR)
    assert res.amplitude(()) == pytest.approx(-1 / math.sqrt(2), abs=1e-15)
    assert w == pytest.approx(0.5, abs=1e-15)


def test_project_plus_on_dbar_is_zero():
    s = basis_state("H", [A0])
    plus = type(s)(s.register, {(H,): 1 / math.sqrt(2), (V,): 1 / math.sqrt(2)})
    _, w = project_diagonal(plus, A0, DiagonalOutcome.DBAR)
    assert w < 1e-30


def test_project_unknown_label():
    with pytest.raises(ValueError):
        project_diagonal(basis_state("H", [A0]), M1, DiagonalOutcome.D)


@given(st.integers(1, 8), st.integers(0, 2**32 - 1))
def test_projection_completeness(n, seed):
    s = random_state(n, seed)
    lab = s.register.labels[seed % n]
    _, wd = project_diagonal(s, lab, DiagonalOutcome.D)
    _, wdb = project_diagonal(s, lab, DiagonalOutcome.DBAR)
    assert abs(wd + wdb - s.norm_sq()) < 1e-12


def test_exact_projection_weights():
    s = exact_basis((V,), [A0])
    res, w = project_diagonal(s, A0, DiagonalOutcome.DBAR)
    assert w == Fraction(1, 2)
    assert res.coeffs == {(): -1}


def test_exact_w_completeness():
    s = exact_w_state(5, [Label(Site.ALICE_KEPT, i) for i in range(5)])
    _, wd = project_diagonal(s, Label(Site.ALICE_KEPT, 2), DiagonalOutcome.D)
    _, wdb = project_diagonal(s, Label(Site.ALICE_KEPT, 2), DiagonalOutcome.DBAR)
    assert wd + wdb == 1


def test_split_by_occupancy_partitions():
    state = basis_state("HH", [M1, M2])
    state = type(state)(state.register, {k: 0.5 for k in itertools.product((H, V), repeat=2)})
    parts = split_by_occupancy(state, M1, M2)
    assert set(parts) == {(2, 0), (0, 2), (1, 1)}
    assert sum(p.norm_sq() for p in parts.values()) == pytest.approx(1)
    assert len(parts[(1, 1)]) == 2
