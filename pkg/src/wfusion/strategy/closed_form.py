"""Closed-form fusion probabilities and published comparison constants."""
from __future__ import annotations

from fractions import Fraction

from ..fusion import Gate


def _check(n: int, m: int) -> None:
    if n < 2 or m < 2:
        raise ValueError(f"fusion needs W states of minimum size 2 on both sides, got n={n}, m={m}")


def p_fg(n: int, m: int) -> Fraction:
    _check(n, m)
    return Fraction(n + m - 2, n * m)


def p_fgf(n: int, m: int) -> Fraction:
    _check(n, m)
    return Fraction(n + m - 1, n * m)


def p_recycle(n: int, m: int) -> Fraction:
    """Both gate photons H; identical for both gates."""
    _check(n, m)
    return Fraction((n - 1) * (m - 1), n * m)


def p_failure(n: int, m: int, gate: Gate) -> Fraction:
    _check(n, m)
    return Fraction(1, n * m) if Gate(gate) is Gate.FG else Fraction(0)


def p_success(n: int, m: int, gate: Gate) -> Fraction:
    return p_fg(n, m) if Gate(gate) is Gate.FG else p_fgf(n, m)


# Success probabilities for preparing a three-photon W state, as reported for
# earlier linear-optics schemes.  Recorded, never simulated.
LITERATURE = {
    "single-photon+fock": Fraction(3, 16),
    "single-photon+bell": Fraction(3, 10),
    "two-bell-experimental": Fraction(3, 27),
    "fgf-two-bell": Fraction(3, 4),
}


def literature_constants() -> dict[str, Fraction]:
    return dict(LITERATURE)
