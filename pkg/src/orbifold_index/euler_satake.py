"""Exact Euler-Satake characteristics of global quotients M/G."""

from __future__ import annotations

from fractions import Fraction

from .errors import MismatchDetected
from .simplicial import (
    QuotientPresentation,
    boundary_presentation,
    euler_characteristic,
    quotient_complex,
)


def chi_orb_direct(P: QuotientPresentation) -> Fraction:
    """Isotropy-weighted count over orbit-simplices."""
    P.require_regular()
    total = Fraction(0)
    for orbit in P.orbits():
        rep = orbit[0]
        total += Fraction((-1) ** (len(rep) - 1), len(P.stabilizer(rep)))
    return total


def chi_orb_oracle(P: QuotientPresentation) -> Fraction:
    """chi(M)/|G|; valid for any simplicial action by orbit-stabilizer counting."""
    return Fraction(euler_characteristic(P.complex), P.order)


def chi_orb(P: QuotientPresentation) -> Fraction:
    direct = chi_orb_direct(P)
    oracle = chi_orb_oracle(P)
    if direct != oracle:
        raise MismatchDetected("chi_orb", f"orbit sum {direct} != chi(M)/|G| = {oracle}")
    return direct


def chi_orb_relative(P: QuotientPresentation) -> Fraction:
    """chi_orb(Q) - chi_orb(dQ)."""
    return chi_orb(P) - chi_orb(boundary_presentation(P))


def chi_underlying(P: QuotientPresentation) -> int:
    """Ordinary Euler characteristic of the underlying space M/G."""
    return euler_characteristic(quotient_complex(P))
