"""Sparse pure states of polarization qubits.

A state is a map from basis kets (tuples of H/V values, one per photon) to
complex amplitudes over an ordered photon register.  Every photon carries a
label ``(site, index)``; registers are always kept in canonical order so ket
strings mean the same thing everywhere.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import IntEnum
from typing import Callable, Iterable, Mapping, NamedTuple, Sequence

import numpy as np

PRUNE = 1e-15
NORM_TOL = 1e-12


class Polarization(IntEnum):
    H = 0
    V = 1

    def __str__(self) -> str:
        return self.name


class Site(IntEnum):
    """Where a photon lives.  Integer order is the canonical register order."""

    ALICE_KEPT = 0
    MODE1 = 1
    BOB_KEPT = 2
    MODE2 = 3
    ANCILLA = 4


_SITE_TAGS = {
    Site.ALICE_KEPT: "a",
    Site.MODE1: "1",
    Site.BOB_KEPT: "b",
    Site.MODE2: "2",
    Site.ANCILLA: "anc",
}


class Label(NamedTuple):
    site: Site
    index: int = 0

    def __str__(self) -> str:
        return f"{_SITE_TAGS[self.site]}{self.index}"


BasisKet = tuple  # tuple[Polarization, ...]


def ket_str(ket: Sequence[int]) -> str:
    return "".join("HV"[p] for p in ket)


def parse_ket(text: str) -> tuple[Polarization, ...]:
    try:
        return tuple(Polarization("HV".index(c)) for c in text)
    except ValueError:
        raise ValueError(f"ket {text!r} may only contain H and V") from None


@dataclass(frozen=True)
class PhotonRegister:
    labels: tuple[Label, ...]

    def __post_init__(self):
        labels = tuple(Label(Site(s), int(i)) for s, i in self.labels)
        if len(set(labels)) != len(labels):
            raise ValueError(f"duplicate photon labels in {labels}")
        if any(lab.index < 0 for lab in labels):
            raise ValueError("photon indices must be nonnegative")
        object.__setattr__(self, "labels", labels)

    def __len__(self) -> int:
        return len(self.labels)

    def __iter__(self):
        return iter(self.labels)

    def __contains__(self, label) -> bool:
        return label in self.labels

    def position(self, label: Label) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise ValueError(f"photon {label} is not in register {self}") from None

    def is_canonical(self) -> bool:
        return list(self.labels) == sorted(self.labels)

    def without(self, label: Label) -> "PhotonRegister":
        pos = self.position(label)
        return PhotonRegister(self.labels[:pos] + self.labels[pos + 1:])

    def __str__(self) -> str:
        return "[" + ",".join(str(lab) for lab in self.labels) + "]"


def site_register(site: Site, n: int, start: int = 0) -> PhotonRegister:
    return PhotonRegister(tuple(Label(site, start + i) for i in range(n)))


@dataclass(frozen=True)
class PureState:
    """Immutable sparse state vector.

    ``normalized`` is False only for post-projection intermediates, whose
    squared norm is a branch weight rather than 1.
    """

    register: PhotonRegister
    amplitudes: Mapping[tuple, complex]
    normalized: bool = True

    def __post_init__(self):
        size = len(self.register)
        clean = {}
        for ket, amp in self.amplitudes.items():
            if len(ket) != size:
                raise ValueError(f"ket of length {len(ket)} on a {size}-photon register")
            amp = complex(amp)
            if abs(amp) >= PRUNE:
                clean[tuple(Polarization(p) for p in ket)] = amp
        object.__setattr__(self, "amplitudes", clean)
        if self.normalized and abs(self.norm_sq() - 1.0) > NORM_TOL:
            raise ValueError(f"state marked normalized has squared norm {self.norm_sq()!r}")

    @property
    def size(self) -> int:
        return len(self.register)

    def norm_sq(self) -> float:
        return math.fsum(abs(a) ** 2 for a in self.amplitudes.values())

    def norm(self) -> float:
        return math.sqrt(self.norm_sq())

    def amplitude(self, ket) -> complex:
        if isinstance(ket, str):
            ket = parse_ket(ket)
        return self.amplitudes.get(tuple(ket), 0j)

    def items(self):
        return self.amplitudes.items()

    def __len__(self) -> int:
        return len(self.amplitudes)

    def normalize(self) -> "PureState":
        nrm = self.norm()
        if nrm == 0.0:
            raise ValueError("cannot normalize the zero vector")
        return PureState(self.register, {k: a / nrm for k, a in self.amplitudes.items()})

    def unnormalized(self) -> "PureState":
        return PureState(self.register, self.amplitudes, normalized=False)

    def canonical(self) -> "PureState":
        """Reorder photons into canonical label order."""
        if self.register.is_canonical():
            return self
        order = sorted(range(self.size), key=lambda i: self.register.labels[i])
        reg = PhotonRegister(tuple(self.register.labels[i] for i in order))
        amps = {tuple(k[i] for i in order): a for k, a in self.amplitudes.items()}
        return PureState(reg, amps, self.normalized)

    def map_kets(self, fn: Callable[[tuple], tuple]) -> "PureState":
        """Apply a ket-to-ket map (must be a bijection on the support)."""
        out: dict[tuple, complex] = {}
        for ket, amp in self.amplitudes.items():
            new = fn(ket)
            out[new] = out.get(new, 0j) + amp
        return PureState(self.register, out, self.normalized)

    def filter(self, keep: Callable[[tuple], bool]) -> "PureState":
        """Unnormalized component on the kets selected by ``keep``."""
        return PureState(
            self.register,
            {k: a for k, a in self.amplitudes.items() if keep(k)},
            normalized=False,
        )

    def contract(self, label: Label, bra: tuple[complex, complex]) -> "PureState":
        """Apply the single-photon bra ``bra[0]<H| + bra[1]<V|`` and drop the photon."""
        pos = self.register.position(label)
        out: dict[tuple, complex] = {}
        for ket, amp in self.amplitudes.items():
            rest = ket[:pos] + ket[pos + 1:]
            out[rest] = out.get(rest, 0j) + bra[ket[pos]] * amp
        return PureState(self.register.without(label), out, normalized=False)

    def relabel(self, mapping: Mapping[Label, Label]) -> "PureState":
        reg = PhotonRegister(tuple(mapping.get(lab, lab) for lab in self.register))
        return PureState(reg, self.amplitudes, self.normalized).canonical()

    def to_vector(self) -> np.ndarray:
        """Dense vector in the register's current order (first photon most significant)."""
        vec = np.zeros(2 ** self.size, dtype=complex)
        for ket, amp in self.amplitudes.items():
            idx = 0
            for p in ket:
                idx = (idx << 1) | int(p)
            vec[idx] = amp
        return vec

    def pretty(self, digits: int = 6) -> str:
        terms = []
        for ket in sorted(self.amplitudes):
            a = self.amplitudes[ket]
            terms.append(f"({a.real:+.{digits}f}{a.imag:+.{digits}f}j)|{ket_str(ket)}>")
        return " ".join(terms) or "0"


def basis_state(pols, register: PhotonRegister | Iterable[Label]) -> PureState:
    if not isinstance(register, PhotonRegister):
        register = PhotonRegister(tuple(register))
    if isinstance(pols, str):
        pols = parse_ket(pols)
    return PureState(register, {tuple(pols): 1.0}).canonical()


def from_vector(vec: Sequence[complex], register: PhotonRegister) -> PureState:
    vec = np.asarray(vec, dtype=complex)
    n = len(register)
    if vec.shape != (2 ** n,):
        raise ValueError(f"vector of shape {vec.shape} does not fit {n} photons")
    amps = {}
    for idx in np.flatnonzero(np.abs(vec) >= PRUNE):
        ket = tuple((int(idx) >> (n - 1 - q)) & 1 for q in range(n))
        amps[ket] = vec[idx]
    return PureState(register, amps).canonical()


def make_w_state(n: int, site: Site = Site.ALICE_KEPT, labels: Sequence[Label] | None = None) -> PureState:
    """Equal-weight superposition of the ``n`` kets with exactly one V photon.

    Built directly, not through the size recursion, so every amplitude is
    exactly ``1/sqrt(n)``.
    """
    if n < 1:
        raise ValueError(f"W state needs at least one photon, got n={n}")
    if labels is None:
        register = site_register(site, n)
    else:
        register = PhotonRegister(tuple(labels))
        if len(register) != n:
            raise ValueError(f"{len(register)} labels given for a W state of size {n}")
    amp = 1.0 / math.sqrt(n)
    amps = {}
    for k in range(n):
        ket = [Polarization.H] * n
        ket[k] = Polarization.V
        amps[tuple(ket)] = amp
    return PureState(register, amps).canonical()


def tensor(a: PureState, b: PureState) -> PureState:
    overlap = set(a.register) & set(b.register)
    if overlap:
        raise ValueError(f"registers overlap on {sorted(str(x) for x in overlap)}")
    reg = PhotonRegister(a.register.labels + b.register.labels)
    amps = {}
    for ka, aa in a.amplitudes.items():
        for kb, ab in b.amplitudes.items():
            amps[ka + kb] = aa * ab
    normalized = a.normalized and b.normalized
    return PureState(reg, amps, normalized).canonical()


def tensor_all(*states: PureState) -> PureState:
    out = states[0]
    for s in states[1:]:
        out = tensor(out, s)
    return out


def inner(a: PureState, b: PureState) -> complex:
    """<a|b>, matching photons by position in canonical order."""
    a, b = a.canonical(), b.canonical()
    if a.size != b.size:
        raise ValueError(f"cannot compare a {a.size}-photon state with a {b.size}-photon state")
    return sum((amp.conjugate() * b.amplitudes.get(ket, 0j) for ket, amp in a.items()), 0j)


def fidelity(a: PureState, b: PureState) -> float:
    """|<a|b>|^2 for normalized a, b.  Labels may differ; sizes must match."""
    return min(1.0, abs(inner(a, b)) ** 2)


def is_unitary(u: np.ndarray, tol: float = NORM_TOL) -> bool:
    u = np.asarray(u, dtype=complex)
    return u.shape == (2, 2) and np.allclose(u.conj().T @ u, np.eye(2), atol=tol, rtol=0)


def apply_single_qubit(state: PureState, photon: Label, u) -> PureState:
    u = np.asarray(u, dtype=complex)
    if not is_unitary(u):
        raise ValueError(f"matrix is not a 2x2 unitary:\n{u}")
    pos = state.register.position(photon)
    out: dict[tuple, complex] = {}
    for ket, amp in state.amplitudes.items():
        src = ket[pos]
        for dst in (Polarization.H, Polarization.V):
            coef = u[dst, src]
            if coef != 0:
                new = ket[:pos] + (dst,) + ket[pos + 1:]
                out[new] = out.get(new, 0j) + coef * amp
    return PureState(state.register, out, state.normalized)


def swap_photons(state: PureState, a: Label, b: Label) -> PureState:
    """Exchange the polarizations carried by photons ``a`` and ``b``."""
    i, j = state.register.position(a), state.register.position(b)

    def swap(ket):
        ket = list(ket)
        ket[i], ket[j] = ket[j], ket[i]
        return tuple(ket)

    return state.map_kets(swap)


def all_h(register: PhotonRegister | Iterable[Label]) -> PureState:
    if not isinstance(register, PhotonRegister):
        register = PhotonRegister(tuple(register))
    return PureState(register, {(Polarization.H,) * len(register): 1.0}).canonical()


def w_recursion_check(n: int, tol: float = NORM_TOL) -> bool:
    """Check W_n = (|H..H>|V> + sqrt(n-1)|W_{n-1}>|H>)/sqrt(n), last photon split off."""
    if n < 2:
        raise ValueError(f"recursion needs n >= 2, got {n}")
    kept = site_register(Site.ALICE_KEPT, n - 1)
    last = PhotonRegister((Label(Site.MODE1, 0),))
    excited_last = tensor(all_h(kept), basis_state("V", last))
    excited_kept = tensor(make_w_state(n - 1, labels=kept.labels), basis_state("H", last))
    rhs: dict[tuple, complex] = {}
    for part, weight in ((excited_last, 1.0), (excited_kept, math.sqrt(n - 1))):
        for ket, amp in part.amplitudes.items():
            rhs[ket] = rhs.get(ket, 0j) + weight * amp / math.sqrt(n)
    lhs = make_w_state(n, labels=kept.labels + last.labels)
    kets = set(lhs.amplitudes) | set(rhs)
    return all(abs(lhs.amplitude(k) - rhs.get(k, 0j)) <= tol for k in kets)


X = np.array([[0, 1], [1, 0]], dtype=complex)
Z = np.array([[1, 0], [0, -1]], dtype=complex)
HADAMARD = np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2)
