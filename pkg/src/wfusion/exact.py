"""Exact rational counterpart of :class:`~wfusion.qcore.PureState`.

Every amplitude that the fusion protocols produce is a rational multiple of
one common square root, so a state is stored as rational coefficients ``c_k``
plus a rational ``scale`` with amplitude ``c_k * sqrt(scale)``.  Squared norms
(branch probabilities) are then exact fractions.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Mapping

from .qcore import Label, PhotonRegister, Polarization, PureState


@dataclass(frozen=True)
class ExactState:
    register: PhotonRegister
    coeffs: Mapping[tuple, Fraction]
    scale: Fraction = Fraction(1)

    def __post_init__(self):
        size = len(self.register)
        clean = {}
        for ket, c in self.coeffs.items():
            if len(ket) != size:
                raise ValueError(f"ket of length {len(ket)} on a {size}-photon register")
            c = Fraction(c)
            if c != 0:
                clean[tuple(Polarization(p) for p in ket)] = c
        object.__setattr__(self, "coeffs", clean)
        object.__setattr__(self, "scale", Fraction(self.scale))

    @property
    def size(self) -> int:
        return len(self.register)

    def norm_sq(self) -> Fraction:
        return self.scale * sum((c * c for c in self.coeffs.values()), Fraction(0))

    def __len__(self) -> int:
        return len(self.coeffs)

    def canonical(self) -> "ExactState":
        if self.register.is_canonical():
            return self
        order = sorted(range(self.size), key=lambda i: self.register.labels[i])
        reg = PhotonRegister(tuple(self.register.labels[i] for i in order))
        coeffs = {tuple(k[i] for i in order): c for k, c in self.coeffs.items()}
        return ExactState(reg, coeffs, self.scale)

    def map_kets(self, fn: Callable[[tuple], tuple]) -> "ExactState":
        out: dict[tuple, Fraction] = {}
        for ket, c in self.coeffs.items():
            new = fn(ket)
            out[new] = out.get(new, Fraction(0)) + c
        return ExactState(self.register, out, self.scale)

    def filter(self, keep: Callable[[tuple], bool]) -> "ExactState":
        return ExactState(self.register, {k: c for k, c in self.coeffs.items() if keep(k)}, self.scale)

    def contract(self, label: Label, bra: tuple[int, int], scale: Fraction = Fraction(1)) -> "ExactState":
        """Apply ``sqrt(scale) * (bra[0]<H| + bra[1]<V|)`` and drop the photon."""
        pos = self.register.position(label)
        out: dict[tuple, Fraction] = {}
        for ket, c in self.coeffs.items():
            rest = ket[:pos] + ket[pos + 1:]
            out[rest] = out.get(rest, Fraction(0)) + bra[ket[pos]] * c
        return ExactState(self.register.without(label), out, self.scale * scale)

    def to_pure(self) -> PureState:
        root = float(self.scale) ** 0.5
        return PureState(self.register, {k: float(c) * root for k, c in self.coeffs.items()}, normalized=False)


def exact_w_state(n: int, labels) -> ExactState:
    if n < 1:
        raise ValueError(f"W state needs at least one photon, got n={n}")
    register = PhotonRegister(tuple(labels))
    if len(register) != n:
        raise ValueError(f"{len(register)} labels given for a W state of size {n}")
    coeffs = {}
    for k in range(n):
        ket = [Polarization.H] * n
        ket[k] = Polarization.V
        coeffs[tuple(ket)] = Fraction(1)
    return ExactState(register, coeffs, Fraction(1, n)).canonical()


def exact_basis(pols, labels) -> ExactState:
    return ExactState(PhotonRegister(tuple(labels)), {tuple(pols): Fraction(1)}).canonical()


def exact_tensor(a: ExactState, b: ExactState) -> ExactState:
    if set(a.register) & set(b.register):
        raise ValueError("registers overlap")
    reg = PhotonRegister(a.register.labels + b.register.labels)
    coeffs = {ka + kb: ca * cb for ka, ca in a.coeffs.items() for kb, cb in b.coeffs.items()}
    return ExactState(reg, coeffs, a.scale * b.scale).canonical()

