import itertools
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

import dense_oracle
from wfusion.fusion import (
    CORRECTION_TABLE,
    BranchClass,
    Detection,
    DetectorArm,
    Gate,
    MODE1,
    enumerate_input_cases,
    feed_forward_correct,
    fuse,
    fuse_fg,
    fuse_fgf,
    target_state,
)
from wfusion.optics import DiagonalOutcome
from wfusion.qcore import Z, Site, apply_single_qubit, fidelity, swap_photons

D, DBAR = DiagonalOutcome.D, DiagonalOutcome.DBAR
SIZES = list(itertools.product(range(2, 9), repeat=2))


def test_fg_3_3_table():
    r = fuse_fg(3, 3)
    assert r.exact[BranchClass.SUCCESS] == Fraction(4, 9)
    assert r.exact[BranchClass.RECYCLE] == Fraction(4, 9)
    assert r.exact[BranchClass.FAILURE] == Fraction(1, 9)
    assert abs(r.p_success - 4 / 9) < 1e-12
    assert abs(r.p_recycle - 4 / 9) < 1e-12
    assert abs(r.p_failure - 1 / 9) < 1e-12


def test_fg_2_2_gives_bell_pair():
    r = fuse_fg(2, 2)
    assert r.exact[BranchClass.SUCCESS] == Fraction(1, 2)
    assert r.fused_size == 2
    assert r.success_fidelity > 1 - 1e-9


def test_fg_2_3_brute_force():
    # Frozen from tests/dense_oracle.py: 1/2, 1/3, 1/6.
    r = fuse_fg(2, 3)
    assert r.exact == {
        BranchClass.SUCCESS: Fraction(1, 2),
        BranchClass.RECYCLE: Fraction(1, 3),
        BranchClass.FAILURE: Fraction(1, 6),
    }


def test_fgf_bell_fusion():
    r = fuse_fgf(2, 2)
    assert r.exact[BranchClass.SUCCESS] == Fraction(3, 4)
    assert r.fused_size == 3
    assert r.success_fidelity > 1 - 1e-9


def test_fgf_3_3():
    assert fuse_fgf(3, 3).exact[BranchClass.SUCCESS] == Fraction(5, 9)


def test_fgf_2_4_brute_force():
    # Frozen from tests/dense_oracle.py: 5/8, fused size 5.
    r = fuse_fgf(2, 4)
    assert r.exact[BranchClass.SUCCESS] == Fraction(5, 8)
    assert r.fused_size == 5


@pytest.mark.parametrize("gate", list(Gate))
@pytest.mark.parametrize("n,m", [(2, 2), (2, 3), (3, 2), (3, 4), (4, 4)])
def test_matches_dense_oracle(gate, n, m):
    report = fuse(n, m, gate)
    oracle = {
        (occ, outs): (p, vec)
        for occ, outs, p, vec in dense_oracle.branches(n, m, fredkin=gate is Gate.FGF)
    }
    assert len(oracle) == len(report.branches)
    for b in report.branches:
        key = (b.occupancy, tuple(d.outcome.value for d in b.detections))
        p, vec = oracle[key]
        assert abs(b.probability - p) < 1e-12
        ours = b.post_state.to_vector()
        overlap = abs(np.vdot(vec / np.linalg.norm(vec), ours)) ** 2
        assert overlap == pytest.approx(1, abs=1e-12)


def test_input_checks():
    for bad in [(1, 3), (3, 1), (0, 2)]:
        with pytest.raises(ValueError, match="minimum size 2"):
            fuse_fg(*bad)
        with pytest.raises(ValueError):
            fuse_fgf(*bad)
        with pytest.raises(ValueError):
            enumerate_input_cases(*bad, Gate.FG)


@pytest.mark.parametrize("gate,n,m", [(Gate.FG, 3, 3), (Gate.FGF, 2, 2), (Gate.FG, 2, 5), (Gate.FGF, 4, 3)])
def test_correction_table_matches_oracle(gate, n, m):
    """For each coincidence pattern exactly one of {correct, leave} reaches fidelity 1."""
    report = fuse(n, m, gate)
    target = target_state(BranchClass.SUCCESS, n, m, gate)
    seen = set()
    for b in report.branches:
        if b.cls is not BranchClass.SUCCESS:
            continue
        raw = fidelity(b.post_state, target)
        flipped = b.post_state
        for lab in flipped.register:
            if lab.site in (Site.BOB_KEPT, Site.ANCILLA):
                flipped = apply_single_qubit(flipped, lab, Z)
        fixed = fidelity(flipped, target)
        assert (abs(raw - 1) < 1e-9) != (abs(fixed - 1) < 1e-9)
        outs = {d.arm: d.outcome for d in b.detections}
        key = (outs[DetectorArm.D1], outs[DetectorArm.D2])
        assert CORRECTION_TABLE[key] == (abs(fixed - 1) < 1e-9)
        seen.add(key)
    assert seen == set(CORRECTION_TABLE)


def _success_branch(report, d1, d2):
    for b in report.branches:
        if b.cls is BranchClass.SUCCESS:
            outs = {d.arm: d.outcome for d in b.detections}
            if (outs[DetectorArm.D1], outs[DetectorArm.D2]) == (d1, d2):
                return b
    raise LookupError


def test_dd_outcome_needs_no_correction():
    r = fuse_fg(3, 3)
    b = _success_branch(r, D, D)
    assert b.final_state is b.post_state
    assert b.fidelity == pytest.approx(1, abs=1e-9)


def test_d_dbar_outcome_needs_correction():
    r = fuse_fg(3, 3)
    b = _success_branch(r, D, DBAR)
    target = target_state(BranchClass.SUCCESS, 3, 3, Gate.FG)
    assert fidelity(b.post_state, target) < 1 - 1e-6
    assert b.fidelity == pytest.approx(1, abs=1e-9)


def test_dbar_dbar_fgf_bell():
    b = _success_branch(fuse_fgf(2, 2), DBAR, DBAR)
    assert b.fidelity > 1 - 1e-9


def test_correction_rejects_non_success():
    r = fuse_fg(3, 3)
    recycle = next(b for b in r.branches if b.cls is BranchClass.RECYCLE)
    with pytest.raises(ValueError):
        feed_forward_correct(recycle.post_state, recycle.detections, Gate.FG)
    with pytest.raises(ValueError):
        feed_forward_correct(recycle.post_state, [Detection(MODE1, DetectorArm.D1, D)], Gate.FG)


@pytest.mark.parametrize("n,m", SIZES)
def test_report_invariants(n, m):
    for gate in Gate:
        r = fuse(n, m, gate)
        assert abs(sum(b.probability for b in r.branches) - 1) < 1e-12
        assert abs(r.p_success + r.p_recycle + r.p_failure - 1) < 1e-12
        assert sum(r.exact.values()) == 1
        assert sum(b.probability_exact for b in r.branches) == 1
        assert r.fused_size == n + m - (2 if gate is Gate.FG else 1)
        for b in r.branches:
            assert sum(b.occupancy) == 2
            assert b.fidelity > 1 - 1e-9
        if gate is Gate.FGF:
            assert r.occupancy_probability((0, 2)) < 1e-12


@pytest.mark.parametrize("n,m", SIZES)
def test_gain_is_one_over_nm(n, m):
    fg, fgf = fuse_fg(n, m), fuse_fgf(n, m)
    gain = fgf.exact[BranchClass.SUCCESS] - fg.exact[BranchClass.SUCCESS]
    assert gain == Fraction(1, n * m)
    assert abs((fgf.p_success - fg.p_success) - 1 / (n * m)) < 1e-12


@pytest.mark.parametrize("n,m", SIZES)
def test_case_aggregation_matches_branches(n, m):
    for gate in Gate:
        cases = enumerate_input_cases(n, m, gate)
        totals = {cls: Fraction(0) for cls in BranchClass}
        for c in cases:
            totals[c.cls] += c.probability
        assert totals == fuse(n, m, gate).exact
        probs = {c.pattern: c.probability for c in cases}
        assert probs == {
            "HH": Fraction((n - 1) * (m - 1), n * m),
            "HV": Fraction(n - 1, n * m),
            "VH": Fraction(m - 1, n * m),
            "VV": Fraction(1, n * m),
        }


def test_input_case_classes():
    fg = {c.pattern: c.cls for c in enumerate_input_cases(3, 3, "fg")}
    fgf = {c.pattern: c.cls for c in enumerate_input_cases(3, 3, "fgf")}
    assert fg == {"HH": BranchClass.RECYCLE, "HV": BranchClass.SUCCESS,
                  "VH": BranchClass.SUCCESS, "VV": BranchClass.FAILURE}
    assert fgf["VV"] is BranchClass.SUCCESS
    assert {k: v for k, v in fgf.items() if k != "VV"} == {k: v for k, v in fg.items() if k != "VV"}


def test_recycle_with_bell_input_leaves_single_photon():
    r = fuse_fg(2, 4)
    for b in r.branches:
        if b.cls is BranchClass.RECYCLE:
            alice = [lab for lab in b.final_state.register if lab.site is Site.ALICE_KEPT]
            assert len(alice) == 1
            assert b.fidelity > 1 - 1e-9


def test_bunched_branches_are_product_states():
    # Every bunched post-state equals the target product state up to phase.
    for gate in Gate:
        r = fuse(3, 4, gate)
        for b in r.branches:
            if b.cls is not BranchClass.SUCCESS:
                assert b.fidelity > 1 - 1e-12


@given(st.integers(2, 7), st.integers(2, 7), st.sampled_from(list(Gate)), st.data())
def test_fused_state_permutation_symmetric(n, m, gate, data):
    r = fuse(n, m, gate)
    b = data.draw(st.sampled_from([b for b in r.branches if b.cls is BranchClass.SUCCESS]))
    labels = b.final_state.register.labels
    i = data.draw(st.integers(0, len(labels) - 1))
    j = data.draw(st.integers(0, len(labels) - 1))
    swapped = swap_photons(b.final_state, labels[i], labels[j])
    assert fidelity(swapped, b.final_state) > 1 - 1e-9
