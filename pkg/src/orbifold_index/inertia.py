"""Inertia sectors M^g / C(g) of a global quotient and the inertia index formula."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .errors import InertiaMismatch, MismatchDetected, TangencyViolation
from .euler_satake import chi_underlying
from .exit_chain import ExitChain, compute_chain
from .geometry import Domain
from .group_action import GroupAction, centralizer, conjugacy_classes
from .simplicial import (
    QuotientPresentation,
    SimplicialComplex,
    boundary_presentation,
    boundary_subcomplex,
    double_complex,
    euler_characteristic,
    fixed_subcomplex,
)
from .vector_field import TOL_FIELD, FieldExpr, IndexSum, orbifold_index_sum


@dataclass
class Sector:
    class_rep: int
    class_size: int
    fixed_complex: SimplicialComplex
    centralizer_action: GroupAction
    chi_fixed: int  # chi(M^g)
    chi_orb_value: Fraction

    @property
    def centralizer_order(self) -> int:
        return self.centralizer_action.order

    @property
    def untwisted(self) -> bool:
        return self.class_rep == 0


def _orbit_weighted_chi(K: SimplicialComplex, C: GroupAction) -> Fraction:
    """Isotropy-weighted simplex count of K under C (C need not act faithfully)."""
    seen: set = set()
    total = Fraction(0)
    for s in sorted(K.simplices, key=lambda s: (len(s), s)):
        if s in seen:
            continue
        orbit = {C.apply_simplex(a, s) for a in range(C.order)}
        seen.update(orbit)
        stab = C.order // len(orbit)
        total += Fraction((-1) ** (len(s) - 1), stab)
    return total


def build_sectors(P: QuotientPresentation) -> list[Sector]:
    P.require_regular()
    G = P.action
    sectors = []
    for cls in conjugacy_classes(G):
        g = cls[0]
        Mg = fixed_subcomplex(P, g)
        C = centralizer(G, g)
        for a in range(C.order):
            for s in Mg.simplices:
                if C.apply_simplex(a, s) not in Mg:
                    raise InertiaMismatch(f"M^g for g={g} is not invariant under its centralizer")
        chi = euler_characteristic(Mg)
        value = Fraction(chi, C.order)
        direct = _orbit_weighted_chi(Mg, C)
        if direct != value:
            raise InertiaMismatch(f"sector g={g}: orbit count {direct} != chi(M^g)/|C(g)| = {value}")
        sectors.append(Sector(g, len(cls), Mg, C, chi, value))
    return sectors


def chi_orb_inertia(P: QuotientPresentation) -> Fraction:
    total = sum((s.chi_orb_value for s in build_sectors(P)), Fraction(0))
    under = chi_underlying(P)
    if total != under:
        raise InertiaMismatch(f"sector sum {total} != chi of the underlying space {under}")
    return total


def check_boundary_compatibility(P: QuotientPresentation) -> bool:
    """Sectors of dP coincide with the boundaries of the sectors of P."""
    B = boundary_presentation(P)
    for cls in conjugacy_classes(P.action):
        g = cls[0]
        own = boundary_subcomplex(fixed_subcomplex(P, g))
        if set(own.simplices) != set(fixed_subcomplex(B, g).simplices):
            return False
    return True


def check_double_commutation(P: QuotientPresentation) -> tuple[Fraction, Fraction, Fraction]:
    """(inertia chi of the double, of P, of dP); the first is 2x - y of the others."""
    D = double_complex(P)
    d = chi_orb_inertia(D)
    q = chi_orb_inertia(P)
    b = chi_orb_inertia(boundary_presentation(P))
    if d != 2 * q - b:
        raise MismatchDetected("double/inertia commutation", f"{d} != 2*{q} - {b}")
    return d, q, b


def _fixed_basis(A: np.ndarray, tol: float = 1e-9) -> np.ndarray:
    """Orthonormal basis (columns) of ker(A - I)."""
    n = A.shape[0]
    _, sv, Vt = np.linalg.svd(A - np.eye(n))
    return Vt[sv < tol].T if n else np.zeros((0, 0))


@dataclass
class SectorIndex:
    class_rep: int
    fixed_dim: int
    zeros: list[tuple[float, ...]]
    indices: list[int]  # index of the restricted field at each zero in M^g
    total: Fraction  # upstairs sum / |C(g)|


@dataclass
class CorollaryReport:
    sectors: list[SectorIndex]
    lhs: Fraction  # Ind^orb of the induced field on the inertia orbifold
    relative_underlying: int  # chi(X_Q, X_dQ)
    chain_underlying: list[int]  # chi(X_{R_-^i}, X_{Gamma^i})
    exit_agreement: bool
    checks: dict[str, bool] = field(default_factory=dict)

    @property
    def rhs(self) -> int:
        return self.relative_underlying + sum(self.chain_underlying)

    @property
    def passed(self) -> bool:
        return all(self.checks.values())


def _restricted_index(F: FieldExpr, z: np.ndarray, B: np.ndarray) -> int:
    d = B.shape[1]
    if d == 0:
        # the empty Jacobian has determinant 1
        return 1
    J = B.T @ F.jacobian(z) @ B
    det = float(np.linalg.det(J))
    if det == 0.0:
        raise MismatchDetected("inertia index", f"restricted zero at {tuple(z)} is degenerate")
    return 1 if det > 0 else -1


def _check_tangency(F: FieldExpr, K: SimplicialComplex, B: np.ndarray, pts, tol_field: float) -> None:
    if K.coords is None:
        return
    proj = np.eye(B.shape[0]) - B @ B.T
    samples = [K.barycenter(s) for s in K.simplices] + [np.asarray(p) for p in pts]
    for p in samples:
        off = proj @ F(p)
        if np.max(np.abs(off), initial=0.0) > tol_field * max(1.0, float(np.max(np.abs(F(p)), initial=0.0))):
            raise TangencyViolation(f"field leaves the fixed set at {tuple(p)} (normal part {off})")


def verify_corollary(
    F: FieldExpr,
    P: QuotientPresentation,
    domain: Domain | None = None,
    interior: IndexSum | None = None,
    chain: ExitChain | None = None,
    tol_field: float = TOL_FIELD,
    raise_on_mismatch: bool = True,
) -> CorollaryReport:
    """Index of the induced field on the inertia orbifold against underlying-space chis."""
    domain = domain or Domain.from_complex(P.complex)
    if interior is None:
        interior = orbifold_index_sum(F, P, domain)
    if chain is None:
        chain = compute_chain(F, P, domain)
    G = P.action
    zeros = [np.array(r.location) for r in interior.records]
    out = []
    for sec in build_sectors(P):
        g = sec.class_rep
        A = G.matrix(g)
        B = _fixed_basis(A)
        fixed = [z for z in zeros if np.linalg.norm(A @ z - z) < 1e-7]
        _check_tangency(F, sec.fixed_complex, B, fixed, tol_field)
        idx = [_restricted_index(F, z, B) for z in fixed]
        out.append(
            SectorIndex(g, B.shape[1], [tuple(float(c) for c in z) for z in fixed], idx,
                        Fraction(sum(idx), sec.centralizer_order))
        )
    lhs = sum((s.total for s in out), Fraction(0))
    rel = chi_underlying(P) - chi_underlying(boundary_presentation(P))
    chain_terms = [lvl.region_chi_underlying - lvl.gamma_chi_underlying for lvl in chain.levels]
    exit_ok = _exit_agreement(F, P, domain)
    report = CorollaryReport(out, lhs, rel, chain_terms, exit_ok)
    report.checks = {"corollary": lhs == report.rhs, "exit_correspondence": exit_ok}
    if raise_on_mismatch:
        for label, ok in report.checks.items():
            if not ok:
                raise MismatchDetected(label, f"inertia index {lhs} vs underlying {report.rhs}")
    return report


def _exit_agreement(F: FieldExpr, P: QuotientPresentation, domain: Domain) -> bool:
    """At boundary points of a sector, pointing out of M^g matches pointing out of M.

    The outward normal at a point fixed by g is itself fixed by g, so its
    projection to the fixed subspace is the outward normal of M^g.
    """
    G = P.action
    K = P.complex
    if K.coords is None:
        return True
    bverts = set(boundary_subcomplex(K).vertices)
    for cls in conjugacy_classes(G)[1:]:
        g = cls[0]
        B = _fixed_basis(G.matrix(g))
        for v in fixed_subcomplex(P, g).vertices:
            if v not in bverts:
                continue
            p = K.coords[v]
            n = _outward(domain, p)
            m = B @ (B.T @ n)
            a, b = float(np.dot(F(p), n)), float(np.dot(F(p), m))
            if np.sign(round(a, 9)) != np.sign(round(b, 9)):
                return False
    return True


def _outward(domain: Domain, p: np.ndarray) -> np.ndarray:
    if domain.dim == 1:
        e = min(domain.endpoints, key=lambda e: abs(e.x - p[0]))
        return np.array([float(e.outward)])
    best = None
    for c in domain.curves:
        t = np.linspace(0.0, c.period, 2048, endpoint=False)
        pts = c.point(t)
        k = int(np.argmin(np.linalg.norm(pts - p, axis=1)))
        d = float(np.linalg.norm(pts[k] - p))
        if best is None or d < best[0]:
            best = (d, c.normal(t[k]))
    return np.asarray(best[1])
