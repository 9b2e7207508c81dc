"""Exit-region chains R_-^i, R_+^i, Gamma^i of a field in generic contact with dM.

Regions are computed upstairs on M and turned into orbifold Euler
characteristics by the global-quotient rule chi_orb(S/G) = chi(S)/|G|; a
second, downstairs count over orbit representatives weighted by isotropy
is kept alongside as a cross-check.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from scipy.optimize import minimize_scalar

from .errors import FieldVanishesOnBoundary, MismatchDetected, NotGeneric, UnsupportedDimension
from .geometry import Circle, Curve, Domain
from .group_action import GroupAction
from .simplicial import QuotientPresentation
from .vector_field import TOL_DEGENERATE, TOL_FIELD, TOL_NEWTON, FieldExpr

SCAN_SAMPLES = 1024
MATCH_TOL = 1e-7


@dataclass(frozen=True)
class BoundaryPoint:
    position: tuple[float, ...]
    outward_normal: tuple[float, ...]
    tangent: tuple[float, ...] | None = None
    curve: int = -1
    param: float = 0.0


@dataclass(frozen=True)
class Arc:
    curve: int
    start: float
    end: float  # may exceed the period when the arc wraps
    full: bool = False

    @property
    def chi(self) -> int:
        return 0 if self.full else 1

    def midpoint(self) -> float:
        return 0.5 * (self.start + self.end)


@dataclass(frozen=True)
class Tangency:
    """A point of Gamma^1 together with the data that classifies it."""

    point: BoundaryPoint
    slope: float  # derivative of the normal component along the curve
    tangential: float  # field component along the curve direction
    exits: bool  # field points out of R_-^1 here (so the point is in R_-^2)


@dataclass
class ExitLevel:
    level: int
    region: list  # Arc list at level 1 of a 2-manifold, BoundaryPoint list otherwise
    gamma: list[BoundaryPoint]
    region_chi: int
    gamma_chi: int
    chi_term: Fraction
    chi_term_downstairs: Fraction
    region_orbits: int = 0
    gamma_orbits: int = 0
    region_chi_underlying: int = 0
    gamma_chi_underlying: int = 0
    region_isotropy: list[int] = field(default_factory=list)
    gamma_isotropy: list[int] = field(default_factory=list)

    @property
    def empty(self) -> bool:
        return not self.region


@dataclass
class ExitChain:
    dim: int
    order: int
    levels: list[ExitLevel]
    r_plus: list  # R_+^1
    tangencies: list[Tangency] = field(default_factory=list)

    @property
    def chi_terms(self) -> list[Fraction]:
        return [lvl.chi_term for lvl in self.levels]

    @property
    def total(self) -> Fraction:
        return sum(self.chi_terms, Fraction(0))

    @property
    def underlying_total(self) -> int:
        return sum(lvl.region_chi_underlying - lvl.gamma_chi_underlying for lvl in self.levels)


@dataclass
class GenericReport:
    passed: bool
    failures: list[tuple[str, str]]  # (location, reason)


class _Collector:
    """Raise on the first failure, or record all of them."""

    def __init__(self, collect: bool) -> None:
        self.collect = collect
        self.failures: list[tuple[str, str]] = []

    def fail(self, exc_type, where: str, why: str) -> None:
        if not self.collect:
            raise exc_type(f"{where}: {why}")
        self.failures.append((where, why))


# ---------------------------------------------------------------------------
# boundary geometry


def _curve_dnormal(curve: Curve, t):
    if isinstance(curve, Circle):
        t = np.asarray(t, dtype=float)
        return np.stack([-curve.side * np.sin(t), np.cos(t)], axis=-1)
    return np.zeros(np.shape(t) + (2,))


def boundary_point(domain: Domain, curve: int, t: float) -> BoundaryPoint:
    c = domain.curves[curve]
    return BoundaryPoint(
        tuple(float(v) for v in c.point(t)),
        tuple(float(v) for v in c.normal(t)),
        tuple(float(v) for v in c.tangent(t)),
        curve,
        float(t),
    )


def normal_component(F: FieldExpr, domain: Domain, b) -> float:
    """Outward normal component of ``F`` at a boundary location.

    ``b`` is an endpoint index for 1-manifolds and ``(curve, parameter)`` for
    surfaces.  Positive means the field points out of M.
    """
    if domain.dim == 1:
        e = domain.endpoints[b]
        return float(F([e.x])[0] * e.outward)
    curve, t = b
    c = domain.curves[curve]
    return float(np.dot(F(c.point(t)), c.normal(t)))


def _nc_many(F: FieldExpr, c: Curve, t: np.ndarray) -> np.ndarray:
    return np.einsum("ij,ij->i", F.many(c.point(t)), c.normal(t))


def _nc_slope(F: FieldExpr, c: Curve, t: float) -> float:
    p = c.point(t)
    dp = c.speed(t) * c.tangent(t)
    return float(np.dot(F.jacobian(p) @ dp, c.normal(t)) + np.dot(F(p), _curve_dnormal(c, t)))


def _bisect(fn, a: float, b: float, fa: float, tol: float) -> float:
    for _ in range(200):
        if b - a <= tol:
            break
        m = 0.5 * (a + b)
        fm = fn(m)
        if fm == 0.0:
            return m
        if (fm > 0) == (fa > 0):
            a, fa = m, fm
        else:
            b = m
    return 0.5 * (a + b)


def _scan_curve(F, domain, ci, coll, tol_root, tol_degenerate, tol_field):
    c = domain.curves[ci]
    T = c.period
    t = np.linspace(0.0, T, SCAN_SAMPLES, endpoint=False)
    vals = F.many(c.point(t))
    norms = np.linalg.norm(vals, axis=1)
    if not np.all(np.isfinite(norms)) or norms.min() <= tol_field:
        k = int(np.argmin(norms))
        coll.fail(FieldVanishesOnBoundary, f"curve {ci} t={t[k]:.6f}", "field vanishes on the boundary")
        return None
    nc = np.einsum("ij,ij->i", vals, c.normal(t))
    if np.max(np.abs(nc)) <= tol_field:
        coll.fail(NotGeneric, f"curve {ci}", "normal component vanishes identically")
        return None

    def fn(s: float) -> float:
        return float(_nc_many(F, c, np.array([s]))[0])

    roots = []
    m = len(t)
    for i in range(m):
        j = (i + 1) % m
        a, b = t[i], t[i] + T / m
        if nc[i] == 0.0:
            roots.append(t[i])
        elif nc[i] * nc[j] < 0:
            roots.append(_bisect(fn, a, b, nc[i], tol_root) % T)
    # a touching zero (double root) shows up as a near-zero local minimum of |nc|
    absn = np.abs(nc)
    for i in range(m):
        lo, hi = absn[(i - 1) % m], absn[(i + 1) % m]
        strict = absn[i] < lo or absn[i] < hi
        small = absn[i] <= 0.05 * absn.max()
        if strict and small and absn[i] <= lo and absn[i] <= hi and nc[(i - 1) % m] * nc[(i + 1) % m] > 0:
            res = minimize_scalar(
                lambda s: abs(fn(s)), bounds=(t[i] - T / m, t[i] + T / m), method="bounded",
                options={"xatol": 1e-12},
            )
            if res.fun <= tol_field:
                coll.fail(NotGeneric, f"curve {ci} t={res.x % T:.6f}", "normal component touches zero without crossing")
    roots = sorted(roots)
    for corner in c.corners():
        for r in roots:
            d = min(abs(r - corner), T - abs(r - corner))
            if d < 1e-9:
                coll.fail(NotGeneric, f"curve {ci} t={r:.6f}", "tangency at a facet corner")
    return c, roots


def _classify(F, domain, ci, c, roots, coll, tol_degenerate, tol_field):
    T = c.period
    tangencies = []
    for r in roots:
        slope = _nc_slope(F, c, r)
        tangential = float(np.dot(F(c.point(r)), c.tangent(r)))
        where = f"curve {ci} t={r:.6f}"
        if abs(slope) <= tol_degenerate:
            coll.fail(NotGeneric, where, f"normal component has a degenerate root (slope {slope:.2e})")
        if abs(tangential) <= tol_field:
            coll.fail(NotGeneric, where, "field vanishes along the tangency locus")
        tangencies.append(Tangency(boundary_point(domain, ci, r), slope, tangential, slope * tangential < 0))
    arcs_minus, arcs_plus = [], []
    if not roots:
        sign = normal_component(F, domain, (ci, 0.0))
        (arcs_minus if sign > 0 else arcs_plus).append(Arc(ci, 0.0, T, full=True))
        return tangencies, arcs_minus, arcs_plus
    if len(roots) % 2:
        coll.fail(NotGeneric, f"curve {ci}", "odd number of sign changes of the normal component")
    for k, r in enumerate(roots):
        nxt = roots[k + 1] if k + 1 < len(roots) else roots[0] + T
        arc = Arc(ci, r, nxt)
        sign = normal_component(F, domain, (ci, arc.midpoint() % T))
        (arcs_minus if sign > 0 else arcs_plus).append(arc)
    return tangencies, arcs_minus, arcs_plus


# ---------------------------------------------------------------------------
# orbit bookkeeping


def _match(points: list[np.ndarray], q: np.ndarray) -> int | None:
    for j, p in enumerate(points):
        if np.linalg.norm(p - q) < MATCH_TOL:
            return j
    return None


def _point_orbits(G: GroupAction, points: list[np.ndarray]) -> tuple[list[list[int]], list[int]]:
    """Orbits of a G-invariant finite point set and the stabilizer order of each orbit."""
    seen: set[int] = set()
    orbits, stabs = [], []
    for i, p in enumerate(points):
        if i in seen:
            continue
        members, stab = set(), 0
        for a in range(G.order):
            j = _match(points, G.matrix(a) @ p)
            if j is None:
                raise MismatchDetected("G-invariance", f"image of boundary point {tuple(p)} not in the set")
            members.add(j)
            stab += j == i
        seen.update(members)
        orbits.append(sorted(members))
        stabs.append(stab)
    return orbits, stabs


def _arc_anchor(domain: Domain, arc: Arc) -> np.ndarray:
    c = domain.curves[arc.curve]
    if arc.full:
        # a full curve is identified by its centre-of-mass and length
        t = np.linspace(0.0, c.period, 64, endpoint=False)
        return np.append(c.point(t).mean(axis=0), c.period)
    return np.append(c.point(arc.midpoint() % c.period), arc.end - arc.start)


def _arc_orbits(G: GroupAction, domain: Domain, arcs: list[Arc]):
    anchors = [_arc_anchor(domain, a) for a in arcs]
    seen: set[int] = set()
    orbits, stabs = [], []
    for i, anc in enumerate(anchors):
        if i in seen:
            continue
        members, stab = set(), 0
        for a in range(G.order):
            q = np.append(G.matrix(a) @ anc[:2], anc[2])
            j = _match(anchors, q)
            if j is None:
                raise MismatchDetected("G-invariance", f"image of arc {arcs[i]} is not an arc of the region")
            members.add(j)
            stab += j == i
        seen.update(members)
        orbits.append(sorted(members))
        stabs.append(stab)
    return orbits, stabs


def _level(level, region, gamma, region_chis, order, r_orbits, r_stabs, g_orbits, g_stabs) -> ExitLevel:
    region_chi = sum(region_chis)
    gamma_chi = len(gamma)
    term = Fraction(region_chi - gamma_chi, order)
    down = sum((Fraction(region_chis[o[0]], s) for o, s in zip(r_orbits, r_stabs)), Fraction(0))
    down -= sum((Fraction(1, s) for s in g_stabs), Fraction(0))
    if term != down:
        raise MismatchDetected("exit chain orbit count", f"level {level}: {term} upstairs vs {down} downstairs")
    return ExitLevel(
        level,
        region,
        gamma,
        region_chi,
        gamma_chi,
        term,
        down,
        region_orbits=len(r_orbits),
        gamma_orbits=len(g_orbits),
        region_chi_underlying=sum(region_chis[o[0]] for o in r_orbits),
        gamma_chi_underlying=len(g_orbits),
        region_isotropy=list(r_stabs),
        gamma_isotropy=list(g_stabs),
    )


# ---------------------------------------------------------------------------
# main entry points


def _chain(F, P, domain, coll, tol_root, tol_degenerate, tol_field) -> ExitChain | None:
    n = domain.dim
    G = P.action
    if n == 1:
        outs, ins = [], []
        for k, e in enumerate(domain.endpoints):
            v = normal_component(F, domain, k)
            bp = BoundaryPoint((e.x,), (float(e.outward),))
            if abs(v) <= tol_field:
                coll.fail(FieldVanishesOnBoundary, f"endpoint x={e.x}", "field vanishes on the boundary")
            (outs if v > 0 else ins).append(bp)
        if coll.failures:
            return None
        pts = [np.array(b.position) for b in outs]
        o, s = _point_orbits(G, pts)
        lvl = _level(1, outs, [], [1] * len(outs), G.order, o, s, [], [])
        return ExitChain(1, G.order, [lvl], ins)
    if n != 2:
        raise UnsupportedDimension(f"exit chains are implemented for n <= 2, got n = {n}")

    tangencies, minus, plus = [], [], []
    for ci in range(len(domain.curves)):
        scanned = _scan_curve(F, domain, ci, coll, tol_root, tol_degenerate, tol_field)
        if scanned is None:
            continue
        c, roots = scanned
        tg, mi, pl = _classify(F, domain, ci, c, roots, coll, tol_degenerate, tol_field)
        tangencies += tg
        minus += mi
        plus += pl
    if coll.failures:
        return None

    gpts = [np.array(t.point.position) for t in tangencies]
    g_orb, g_stab = _point_orbits(G, gpts)
    for orb in g_orb:
        if len({tangencies[j].exits for j in orb}) != 1:
            raise MismatchDetected("G-invariance", "exit classification differs along an orbit of tangencies")
    r_orb, r_stab = _arc_orbits(G, domain, minus)
    level1 = _level(1, minus, [t.point for t in tangencies], [a.chi for a in minus], G.order, r_orb, r_stab, g_orb, g_stab)

    exiting = [t.point for t in tangencies if t.exits]
    epts = [np.array(b.position) for b in exiting]
    e_orb, e_stab = _point_orbits(G, epts)
    level2 = _level(2, exiting, [], [1] * len(exiting), G.order, e_orb, e_stab, [], [])

    # Gamma^1 must be exactly the common boundary of R_-^1 and R_+^1
    ends = lambda arcs: sorted(  # noqa: E731
        (a.curve, round(x % domain.curves[a.curve].period, 9)) for a in arcs if not a.full for x in (a.start, a.end)
    )
    gam = sorted((t.point.curve, round(t.point.param, 9)) for t in tangencies)
    if ends(minus) != gam or ends(plus) != gam:
        raise MismatchDetected("tangency locus", "Gamma^1 differs from the boundary of R_-^1 or R_+^1")
    return ExitChain(2, G.order, [level1, level2], plus, tangencies)


def compute_chain(
    F: FieldExpr,
    P: QuotientPresentation,
    domain: Domain | None = None,
    tol_root: float = TOL_NEWTON,
    tol_degenerate: float = TOL_DEGENERATE,
    tol_field: float = TOL_FIELD,
) -> ExitChain:
    domain = domain or Domain.from_complex(P.complex)
    if domain.dim not in (1, 2):
        raise UnsupportedDimension(f"exit chains are implemented for n <= 2, got n = {domain.dim}")
    return _chain(F, P, domain, _Collector(False), tol_root, tol_degenerate, tol_field)


def verify_generic_contact(
    F: FieldExpr,
    P: QuotientPresentation,
    domain: Domain | None = None,
    tol_root: float = TOL_NEWTON,
    tol_degenerate: float = TOL_DEGENERATE,
    tol_field: float = TOL_FIELD,
) -> GenericReport:
    domain = domain or Domain.from_complex(P.complex)
    coll = _Collector(True)
    _chain(F, P, domain, coll, tol_root, tol_degenerate, tol_field)
    return GenericReport(not coll.failures, coll.failures)
