"""Ideal optical elements acting on polarization states.

The half-wave plate is an exact H<->V flip, the Fredkin gate a controlled
swap, the polarizing beamsplitter a fixed routing table, and each detector
unit a projection onto the diagonal basis
``|D> = (|H>+|V>)/sqrt2``, ``|Dbar> = (|H>-|V>)/sqrt2``.

All state-level functions accept either a :class:`PureState` or an
:class:`ExactState`.
"""
from __future__ import annotations

import math
from enum import Enum
from fractions import Fraction

from .exact import ExactState
from .qcore import Label, Polarization, PureState, Site

H, V = Polarization.H, Polarization.V
_INV_SQRT2 = 1.0 / math.sqrt(2.0)


class DetectorArm(Enum):
    D1 = "D1"
    D2 = "D2"


class DiagonalOutcome(Enum):
    D = "D"
    DBAR = "Dbar"

    @property
    def sign(self) -> int:
        """Sign of the V component of the outcome's basis vector."""
        return 1 if self is DiagonalOutcome.D else -1


# Frozen from the four detection cases: HH -> only D1, VV -> only D2,
# HV and VH -> one photon per arm (HWP on port 2 sits before the PBS).
_PBS_ROUTES = {
    (Site.MODE1, H): DetectorArm.D1,
    (Site.MODE1, V): DetectorArm.D2,
    (Site.MODE2, H): DetectorArm.D2,
    (Site.MODE2, V): DetectorArm.D1,
}


def route_pbs(input_port: Site, pol: Polarization) -> DetectorArm:
    try:
        return _PBS_ROUTES[(Site(input_port), Polarization(pol))]
    except (KeyError, ValueError):
        raise ValueError(f"the beamsplitter has no input port {input_port!r}") from None


def _check_present(state, *labels: Label) -> list[int]:
    return [state.register.position(lab) for lab in labels]


def apply_hwp(state, photon: Label):
    """Rotate one photon's polarization by pi/2 (exact Pauli X)."""
    (pos,) = _check_present(state, photon)

    def flip(ket):
        return ket[:pos] + (Polarization(1 - ket[pos]),) + ket[pos + 1:]

    return state.map_kets(flip)


def apply_fredkin(state, control: Label, target1: Label, target2: Label):
    """Swap the two target photons' polarizations on every ket whose control is V."""
    if len({control, target1, target2}) != 3:
        raise ValueError("Fredkin gate needs three distinct photons")
    c, t1, t2 = _check_present(state, control, target1, target2)

    def cswap(ket):
        if ket[c] != V:
            return ket
        ket = list(ket)
        ket[t1], ket[t2] = ket[t2], ket[t1]
        return tuple(ket)

    return state.map_kets(cswap)


def project_diagonal(state, photon: Label, outcome: DiagonalOutcome):
    """Project one photon onto |D> or |Dbar> and remove it.

    Returns ``(residual, weight)``: the unnormalized remaining state and its
    squared norm.  On an :class:`ExactState` the weight is a ``Fraction``.
    """
    outcome = DiagonalOutcome(outcome)
    if isinstance(state, ExactState):
        residual = state.contract(photon, (1, outcome.sign), Fraction(1, 2))
    else:
        residual = state.contract(photon, (_INV_SQRT2, outcome.sign * _INV_SQRT2))
    return residual, residual.norm_sq()


def split_by_occupancy(state, port1: Label, port2: Label) -> dict[tuple[int, int], object]:
    """Split a state into components by how many photons reach (D1, D2).

    ``port1`` enters the beamsplitter from mode 1 and ``port2`` from mode 2.
    Empty components are omitted.
    """
    p1, p2 = _check_present(state, port1, port2)
    groups: dict[tuple[int, int], list] = {}
    for ket in (state.amplitudes if isinstance(state, PureState) else state.coeffs):
        arms = (route_pbs(Site.MODE1, ket[p1]), route_pbs(Site.MODE2, ket[p2]))
        occ = (arms.count(DetectorArm.D1), arms.count(DetectorArm.D2))
        groups.setdefault(occ, []).append(ket)
    out = {}
    for occ, kets in groups.items():
        members = set(kets)
        out[occ] = state.filter(members.__contains__)
    return out
