"""End-to-end W-state fusion: the plain fusion gate (FG) and FG with a Fredkin
gate plus H-polarized ancilla (FGF).

Both protocols are simulated exhaustively.  Every detection branch (arm
occupancy x D/Dbar result per detected photon) is enumerated with its exact
probability and post-measurement state; nothing is sampled here.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from functools import lru_cache
from itertools import product
from typing import NamedTuple

from .exact import ExactState, exact_basis, exact_tensor, exact_w_state
from .optics import (
    DetectorArm,
    DiagonalOutcome,
    apply_fredkin,
    apply_hwp,
    project_diagonal,
    route_pbs,
    split_by_occupancy,
)
from .qcore import (
    Z,
    Label,
    Polarization,
    PureState,
    Site,
    all_h,
    apply_single_qubit,
    basis_state,
    fidelity,
    make_w_state,
    tensor,
    tensor_all,
)

MODE1 = Label(Site.MODE1, 0)
MODE2 = Label(Site.MODE2, 0)
ANCILLA = Label(Site.ANCILLA, 0)

D, DBAR = DiagonalOutcome.D, DiagonalOutcome.DBAR


class Gate(Enum):
    FG = "fg"
    FGF = "fgf"

    @property
    def size_loss(self) -> int:
        """Photons lost per successful fusion: n + m - size_loss survive."""
        return 2 if self is Gate.FG else 1


class BranchClass(Enum):
    SUCCESS = "Success"
    RECYCLE = "Recycle"
    FAILURE = "Failure"


_OCCUPANCY_CLASS = {
    (1, 1): BranchClass.SUCCESS,
    (2, 0): BranchClass.RECYCLE,
    (0, 2): BranchClass.FAILURE,
}

# Whether the Bob-side (and ancilla) phase flip is needed after a coincidence,
# keyed by (D1 result, D2 result).  Frozen from the fidelity oracle in
# tests/test_fusion.py::test_correction_table_matches_oracle.
CORRECTION_TABLE = {
    (D, D): False,
    (D, DBAR): True,
    (DBAR, D): True,
    (DBAR, DBAR): False,
}


class Detection(NamedTuple):
    """One detected photon.

    In a coincidence branch the mode-1 rail stands for the photon found at D1
    and the mode-2 rail for the one at D2: after the HWP both rails carry the
    same polarization on every coincidence ket, so the PBS exchange of rails
    leaves the ket unchanged.
    """

    label: Label
    arm: DetectorArm
    outcome: DiagonalOutcome


@dataclass(frozen=True)
class DetectionOutcome:
    occupancy: tuple[int, int]  # photons at (D1, D2)
    detections: tuple[Detection, ...]
    probability: float
    post_state: PureState  # normalized, before any correction
    cls: BranchClass
    final_state: PureState  # after feed-forward correction (success only)
    fidelity: float  # final_state against the class's target state
    probability_exact: Fraction | None = None

    @property
    def diag_results(self) -> tuple[tuple[Label, DiagonalOutcome], ...]:
        return tuple((d.label, d.outcome) for d in self.detections)

    @property
    def pattern(self) -> str:
        return ",".join(f"{d.arm.value}:{d.outcome.value}" for d in self.detections)


@dataclass(frozen=True)
class FusionReport:
    n: int
    m: int
    gate: Gate
    branches: tuple[DetectionOutcome, ...]
    p_success: float
    p_recycle: float
    p_failure: float
    success_fidelity: float
    recycle_fidelity: float
    fused_size: int
    exact: dict[BranchClass, Fraction] | None = field(default=None, compare=False)

    def probability(self, cls: BranchClass) -> float:
        return {
            BranchClass.SUCCESS: self.p_success,
            BranchClass.RECYCLE: self.p_recycle,
            BranchClass.FAILURE: self.p_failure,
        }[cls]

    def occupancy_probability(self, occupancy: tuple[int, int]) -> float:
        return math.fsum(b.probability for b in self.branches if b.occupancy == occupancy)


def _check_sizes(n: int, m: int) -> None:
    if int(n) != n or int(m) != m or n < 2 or m < 2:
        raise ValueError(f"fusion needs W states of minimum size 2 on both sides, got n={n}, m={m}")


def _alice_labels(n: int) -> list[Label]:
    return [Label(Site.ALICE_KEPT, i) for i in range(n - 1)] + [MODE1]


def _bob_labels(m: int) -> list[Label]:
    return [Label(Site.BOB_KEPT, i) for i in range(m - 1)] + [MODE2]


def kept_labels(n: int, m: int, gate: Gate) -> list[Label]:
    labels = [Label(Site.ALICE_KEPT, i) for i in range(n - 1)]
    labels += [Label(Site.BOB_KEPT, i) for i in range(m - 1)]
    if gate is Gate.FGF:
        labels.append(ANCILLA)
    return labels


def input_state(n: int, m: int, gate: Gate) -> PureState:
    """|W_n>_A (x) |W_m>_B, with an H ancilla appended for FGF."""
    state = tensor(make_w_state(n, labels=_alice_labels(n)), make_w_state(m, labels=_bob_labels(m)))
    if gate is Gate.FGF:
        state = tensor(state, basis_state("H", [ANCILLA]))
    return state


def _exact_input_state(n: int, m: int, gate: Gate) -> ExactState:
    state = exact_tensor(exact_w_state(n, _alice_labels(n)), exact_w_state(m, _bob_labels(m)))
    if gate is Gate.FGF:
        state = exact_tensor(state, exact_basis((Polarization.H,), [ANCILLA]))
    return state


def _run_optics(state, gate: Gate):
    if gate is Gate.FGF:
        state = apply_fredkin(state, MODE1, MODE2, ANCILLA)
    return apply_hwp(state, MODE2)


def _enumerate(state):
    """Yield (occupancy, detections, residual, weight) for every nonzero branch."""
    for occ, component in sorted(split_by_occupancy(state, MODE1, MODE2).items(), reverse=True):
        reg = component.register
        ket = next(iter(component.amplitudes if isinstance(component, PureState) else component.coeffs))
        if occ == (1, 1):
            arms = (DetectorArm.D1, DetectorArm.D2)
        else:
            arms = (
                route_pbs(Site.MODE1, ket[reg.position(MODE1)]),
                route_pbs(Site.MODE2, ket[reg.position(MODE2)]),
            )
        for x, y in product((D, DBAR), repeat=2):
            r1, _ = project_diagonal(component, MODE1, x)
            residual, weight = project_diagonal(r1, MODE2, y)
            if weight == 0 or (not isinstance(weight, Fraction) and weight < 1e-30):
                continue
            dets = (Detection(MODE1, arms[0], x), Detection(MODE2, arms[1], y))
            yield occ, dets, residual, weight


def feed_forward_correct(state: PureState, diag_results, gate: Gate) -> PureState:
    """Undo the outcome-dependent sign between Alice-side and Bob-side terms.

    ``diag_results`` is the pair of :class:`Detection` records of a
    coincidence branch, in (D1, D2) order.
    """
    gate = Gate(gate)
    dets = list(diag_results)
    if len(dets) != 2 or {d.arm for d in dets} != {DetectorArm.D1, DetectorArm.D2}:
        raise ValueError("feed-forward correction only applies to coincidence (success) branches")
    by_arm = {d.arm: DiagonalOutcome(d.outcome) for d in dets}
    if not CORRECTION_TABLE[(by_arm[DetectorArm.D1], by_arm[DetectorArm.D2])]:
        return state
    for label in state.register:
        if label.site is Site.BOB_KEPT or (gate is Gate.FGF and label.site is Site.ANCILLA):
            state = apply_single_qubit(state, label, Z)
    return state


def target_state(cls: BranchClass, n: int, m: int, gate: Gate) -> PureState:
    """The state each branch class should leave on the kept photons."""
    labels = kept_labels(n, m, gate)
    if cls is BranchClass.SUCCESS:
        return make_w_state(len(labels), labels=labels)
    if cls is BranchClass.RECYCLE:
        parts = [
            make_w_state(n - 1, labels=[lab for lab in labels if lab.site is Site.ALICE_KEPT]),
            make_w_state(m - 1, labels=[lab for lab in labels if lab.site is Site.BOB_KEPT]),
        ]
        if gate is Gate.FGF:
            parts.append(basis_state("H", [ANCILLA]))
        return tensor_all(*parts)
    return all_h(labels)


def _exact_class_probabilities(n: int, m: int, gate: Gate) -> dict[BranchClass, Fraction]:
    state = _run_optics(_exact_input_state(n, m, gate), gate)
    totals = {cls: Fraction(0) for cls in BranchClass}
    for occ, _, _, weight in _enumerate(state):
        totals[_OCCUPANCY_CLASS[occ]] += weight
    return totals


def fuse(n: int, m: int, gate: Gate | str, exact: bool = True) -> FusionReport:
    gate = Gate(gate)
    _check_sizes(n, m)
    state = _run_optics(input_state(n, m, gate), gate)

    exact_weights = {}
    if exact:
        ex_state = _run_optics(_exact_input_state(n, m, gate), gate)
        exact_weights = {(occ, dets): w for occ, dets, _, w in _enumerate(ex_state)}

    targets = {cls: target_state(cls, n, m, gate) for cls in BranchClass}
    branches = []
    for occ, dets, residual, weight in _enumerate(state):
        cls = _OCCUPANCY_CLASS[occ]
        post = residual.normalize()
        final = feed_forward_correct(post, dets, gate) if cls is BranchClass.SUCCESS else post
        branches.append(
            DetectionOutcome(
                occupancy=occ,
                detections=dets,
                probability=weight,
                post_state=post,
                cls=cls,
                final_state=final,
                fidelity=fidelity(final, targets[cls]),
                probability_exact=exact_weights.get((occ, dets)),
            )
        )

    def total(cls):
        return math.fsum(b.probability for b in branches if b.cls is cls)

    def worst(cls):
        fids = [b.fidelity for b in branches if b.cls is cls]
        return min(fids) if fids else float("nan")

    exact_totals = None
    if exact:
        exact_totals = {cls: Fraction(0) for cls in BranchClass}
        for (occ, _), w in exact_weights.items():
            exact_totals[_OCCUPANCY_CLASS[occ]] += w

    return FusionReport(
        n=n,
        m=m,
        gate=gate,
        branches=tuple(branches),
        p_success=total(BranchClass.SUCCESS),
        p_recycle=total(BranchClass.RECYCLE),
        p_failure=total(BranchClass.FAILURE),
        success_fidelity=worst(BranchClass.SUCCESS),
        recycle_fidelity=worst(BranchClass.RECYCLE),
        fused_size=n + m - gate.size_loss,
        exact=exact_totals,
    )


def fuse_fg(n: int, m: int, exact: bool = True) -> FusionReport:
    return fuse(n, m, Gate.FG, exact)


def fuse_fgf(n: int, m: int, exact: bool = True) -> FusionReport:
    return fuse(n, m, Gate.FGF, exact)


class InputCase(NamedTuple):
    pattern: str
    probability: Fraction
    cls: BranchClass


def enumerate_input_cases(n: int, m: int, gate: Gate | str) -> list[InputCase]:
    """The four H/V patterns of the two gate photons, their weights and fate.

    Weights come from the exact input state; the class comes from pushing the
    basis pattern itself through the gate optics.
    """
    gate = Gate(gate)
    _check_sizes(n, m)
    state = _exact_input_state(n, m, gate)
    p1, p2 = state.register.position(MODE1), state.register.position(MODE2)
    cases = []
    for pol1, pol2 in product(Polarization, repeat=2):
        weight = state.filter(lambda k: k[p1] == pol1 and k[p2] == pol2).norm_sq()
        labels = [MODE1, MODE2] + ([ANCILLA] if gate is Gate.FGF else [])
        pols = (pol1, pol2) + ((Polarization.H,) if gate is Gate.FGF else ())
        probe = _run_optics(exact_basis(pols, labels), gate)
        (occ,) = split_by_occupancy(probe, MODE1, MODE2)
        cases.append(InputCase(f"{pol1.name}{pol2.name}", weight, _OCCUPANCY_CLASS[occ]))
    return cases


@lru_cache(maxsize=None)
def branch_probabilities(n: int, m: int, gate: Gate) -> tuple[float, float, float]:
    """(success, recycle, failure) from the float simulation, memoized."""
    report = fuse(n, m, gate, exact=False)
    return report.p_success, report.p_recycle, report.p_failure
