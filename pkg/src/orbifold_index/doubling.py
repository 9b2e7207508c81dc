"""The doubled field on the closed double, and the index bookkeeping it yields.

Near the boundary the double is parameterized by collar coordinates
``(x, v)``: ``x`` on dM and ``v`` the signed depth, ``v > 0`` in the first
copy Q and ``v < 0`` in the reflected copy Q'.  Field components are
written in the product frame: ``h`` along the boundary (unit tangent) and
``w`` along the inward normal.  Reflection flips the sign of ``w`` on Q'.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .errors import (
    BoundaryZeroDegenerate,
    EmptyBoundary,
    MismatchDetected,
    SupportTooWide,
    UnsupportedDimension,
)
from .euler_satake import chi_orb
from .exit_chain import ExitChain, _bisect, compute_chain
from .geometry import Circle, Domain
from .simplicial import QuotientPresentation, boundary_presentation, double_complex
from .vector_field import (
    TOL_DEGENERATE,
    TOL_FIELD,
    FieldExpr,
    IndexSum,
    orbifold_index_sum,
    winding_number,
)

THETA_SAMPLES = 2048
DEPTH_SAMPLES = 128
EPSILON_CAP = 0.25


def bump(v, s: float):
    """C^1 piecewise cubic: 1 on [-s/2, s/2], 0 outside [-s, s]."""
    a = np.abs(np.asarray(v, dtype=float))
    u = np.clip((a - 0.5 * s) / (0.5 * s), 0.0, 1.0)
    return 1.0 - u * u * (3.0 - 2.0 * u)


@dataclass(frozen=True)
class CollarChart:
    epsilon: float
    s: float

    def __post_init__(self) -> None:
        if not 0.0 < self.s < self.epsilon:
            raise SupportTooWide(f"bump support s={self.s} must lie in (0, epsilon={self.epsilon})")


class _Component:
    """One boundary component with its collar frame."""

    period: float = 0.0

    def frame(self, t, depth):
        """Field components (h, w) at boundary parameter ``t`` and depth >= 0."""
        raise NotImplementedError

    def speed(self) -> float:
        return 1.0


class _EndpointComponent(_Component):
    def __init__(self, F: FieldExpr, x: float, outward: int) -> None:
        self.F, self.x, self.outward = F, x, outward

    def position(self, t=0.0):
        return np.array([self.x])

    def frame(self, t, depth):
        depth = np.asarray(depth, dtype=float)
        shape = np.broadcast(np.asarray(t, dtype=float), depth).shape or (1,)
        depth = np.broadcast_to(depth, shape)
        pts = (self.x - self.outward * depth.ravel())[:, None]
        w = (-self.outward * self.F.many(pts)[:, 0]).reshape(shape)
        return np.zeros_like(w), w


class _CircleComponent(_Component):
    def __init__(self, F: FieldExpr, curve: Circle) -> None:
        self.F, self.curve = F, curve
        self.period = curve.period

    def position(self, t):
        return self.curve.point(t)

    def speed(self) -> float:
        return self.curve.radius

    def frame(self, t, depth):
        t = np.asarray(t, dtype=float)
        depth = np.broadcast_to(np.asarray(depth, dtype=float), t.shape)
        flat_t, flat_d = t.ravel(), depth.ravel()
        pts = self.curve.inward_point(flat_t, flat_d)
        Y = self.F.many(pts)
        h = np.einsum("ij,ij->i", Y, self.curve.tangent(flat_t))
        w = -np.einsum("ij,ij->i", Y, self.curve.normal(flat_t))
        return h.reshape(t.shape), w.reshape(t.shape)

    def zh(self, t):
        return self.frame(np.atleast_1d(t), 0.0)[0]

    def zh_slope(self, t: float) -> float:
        c = self.curve
        p = c.point(t)
        dp = c.speed(t) * c.tangent(t)
        dtan = np.array([-np.cos(t), -c.side * np.sin(t)])
        return float(np.dot(self.F.jacobian(p) @ dp, c.tangent(t)) + np.dot(self.F(p), dtan))


@dataclass
class BoundaryZero:
    component: int
    param: float
    position: tuple[float, ...]
    isotropy: int
    zh_index: int  # index of Z_h as a field on dM
    zh_slope: float
    vertical: float  # inward normal component of Y; > 0 means p is in R_+
    jacobian: tuple[tuple[float, ...], ...] = ()
    jacobian_sign: int = 0
    oracle_index: int = 0  # winding number (n = 2) or sign change (n = 1)

    @property
    def region(self) -> str:
        return "+" if self.vertical > 0 else "-"

    @property
    def x_index(self) -> int:
        """Index of the doubled field at p by the block-Jacobian sign rule."""
        return self.zh_index if self.vertical > 0 else -self.zh_index

    @property
    def orb_index(self) -> Fraction:
        return Fraction(self.x_index, self.isotropy)


@dataclass
class DoubledField:
    base: FieldExpr
    domain: Domain
    collar: CollarChart
    components: list[_Component]
    boundary_zeros: list[BoundaryZero]
    order: int
    s_bounds: list[float] = field(default_factory=list)

    def collar_field(self, comp: int, t, v):
        """X_s in the product frame at collar coordinates ``(t, v)``."""
        C = self.components[comp]
        t = np.asarray(t, dtype=float)
        v = np.broadcast_to(np.asarray(v, dtype=float), t.shape)
        h, w = C.frame(t, np.abs(v))
        w = np.where(v < 0, -w, w)
        f = C.frame(t, np.zeros_like(v))[0]  # Z_h, constant in v
        phi = bump(v, self.collar.s)
        X_h = phi * f + (1.0 - phi) * h
        X_v = phi * np.abs(v) * w + (1.0 - phi) * w
        return X_h, X_v

    def evaluate(self, copy: int, point) -> np.ndarray:
        """The doubled field at a point of copy 0 (Q) or copy 1 (Q'), in M's chart."""
        p = np.asarray(point, dtype=float)
        depth = self.domain.boundary_distance(p)
        if depth >= self.collar.epsilon:
            return self.base(p)
        comp, t = self._locate(p)
        v = depth if copy == 0 else -depth
        X_h, X_v = self.collar_field(comp, np.array([t]), np.array([v]))
        if self.domain.dim == 1:
            C = self.components[comp]
            return np.array([-C.outward * X_v[0] * (1 if copy == 0 else -1)])
        c = self.components[comp].curve
        vec = X_h[0] * c.tangent(t) - X_v[0] * c.normal(t)
        if copy == 1:
            # Q' is M with the normal direction reflected
            vec = X_h[0] * c.tangent(t) + X_v[0] * c.normal(t)
        return vec

    def _locate(self, p):
        best = None
        for k, C in enumerate(self.components):
            if isinstance(C, _EndpointComponent):
                d = abs(p[0] - C.x)
                t = 0.0
            else:
                c = C.curve
                d = abs(float(c.signed_depth(p)))
                q = (p - c.center) / max(np.linalg.norm(p - c.center), 1e-300)
                t = float(np.arctan2(c.side * q[1], q[0])) % c.period
            if best is None or d < best[0]:
                best = (d, k, t)
        return best[1], best[2]


def _components(F: FieldExpr, domain: Domain) -> list[_Component]:
    if domain.dim == 1:
        return [_EndpointComponent(F, e.x, e.outward) for e in domain.endpoints]
    if domain.dim == 2:
        if not domain.curves or not all(isinstance(c, Circle) for c in domain.curves):
            raise UnsupportedDimension("the doubled field needs round (circle) boundary components")
        return [_CircleComponent(F, c) for c in domain.curves]
    raise UnsupportedDimension(f"doubling is implemented for n <= 2, got n = {domain.dim}")


def _boundary_zeros(F, P, comps, tol_degenerate, tol_field) -> list[BoundaryZero]:
    G = P.action
    zeros = []
    for k, C in enumerate(comps):
        if isinstance(C, _EndpointComponent):
            # a 0-dimensional boundary: every point is a zero of Z_h, with the
            # empty Jacobian (determinant 1) giving index +1
            w = float(C.frame(0.0, 0.0)[1][0])
            zeros.append(BoundaryZero(k, 0.0, (C.x,), G.isotropy_order([C.x]), 1, 0.0, w))
            continue
        T = C.period
        t = np.linspace(0.0, T, THETA_SAMPLES, endpoint=False)
        z = C.zh(t)
        if np.max(np.abs(z)) <= tol_field:
            raise BoundaryZeroDegenerate(f"tangential component vanishes identically on component {k}")
        roots = []
        m = len(t)
        for i in range(m):
            j = (i + 1) % m
            if z[i] == 0.0:
                roots.append(float(t[i]))
            elif z[i] * z[j] < 0:
                roots.append(_bisect(lambda s: float(C.zh(s)[0]), t[i], t[i] + T / m, z[i], 1e-13) % T)
        for r in sorted(roots):
            slope = C.zh_slope(r)
            if abs(slope) <= tol_degenerate:
                raise BoundaryZeroDegenerate(f"zero of Z_h at t={r:.6f} on component {k} is degenerate")
            pos = C.position(r)
            w = float(C.frame(np.array([r]), 0.0)[1][0])
            zeros.append(
                BoundaryZero(k, r, tuple(float(x) for x in pos), G.isotropy_order(pos), 1 if slope > 0 else -1, slope, w)
            )
        # a touching zero of Z_h would be a degenerate boundary zero
        absz = np.abs(z)
        for i in range(m):
            lo, hi = (i - 1) % m, (i + 1) % m
            if absz[i] <= absz[lo] and absz[i] <= absz[hi] and z[lo] * z[hi] > 0 and absz[i] <= 1e-6:
                raise BoundaryZeroDegenerate(f"Z_h touches zero near t={t[i]:.6f} on component {k}")
    return zeros


def _choose_epsilon(domain: Domain, interior: IndexSum | None) -> float:
    eps = EPSILON_CAP
    if interior is not None:
        for r in interior.records:
            eps = min(eps, 0.5 * domain.boundary_distance(r.location))
    if domain.dim == 1:
        xs = [e.x for e in domain.endpoints]
        eps = min(eps, 0.25 * (max(xs) - min(xs)))
    else:
        curves = domain.curves
        for i, ci in enumerate(curves):
            pts = ci.point(np.linspace(0, ci.period, 256, endpoint=False))
            for j, cj in enumerate(curves):
                if i != j:
                    eps = min(eps, 0.25 * float(np.min(np.abs(cj.signed_depth(pts)))))
            if isinstance(ci, Circle) and ci.side == 1:
                eps = min(eps, 0.5 * ci.radius)
    return eps


def _safe_support(comps, epsilon: float) -> list[float]:
    """Per-component bound below which the collar field has no zeros off v = 0.

    At each boundary parameter, either the horizontal part keeps the sign of
    Z_h over [0, v] (so every convex combination is nonzero) or the vertical
    part keeps its sign over [0, v]; the safe depth is the larger of the two.
    """
    depths = epsilon * np.arange(1, DEPTH_SAMPLES + 1) / DEPTH_SAMPLES
    bounds = []
    for C in comps:
        t = np.linspace(0.0, C.period, THETA_SAMPLES, endpoint=False) if C.period else np.zeros(1)
        TT, DD = np.meshgrid(t, np.concatenate([[0.0], depths]), indexing="ij")
        h, w = C.frame(TT, DD)

        def run(vals):
            ok = (np.sign(vals[:, 1:]) == np.sign(vals[:, :1])) & (vals[:, :1] != 0)
            # number of leading depths keeping the sign
            lead = np.where(ok.all(axis=1), ok.shape[1], np.argmin(ok, axis=1))
            return np.where(lead > 0, depths[np.maximum(lead - 1, 0)], 0.0)

        s_h = run(h) if C.period else np.zeros(1)
        s_v = run(w)
        bounds.append(float(np.min(np.maximum(s_h, s_v))))
    return bounds


def build_doubled_field(
    F: FieldExpr,
    P: QuotientPresentation,
    domain: Domain,
    s: float | None = None,
    epsilon: float | None = None,
    interior: IndexSum | None = None,
    tol_degenerate: float = TOL_DEGENERATE,
    tol_field: float = TOL_FIELD,
) -> DoubledField:
    """Construct X_s on the double from a field in generic contact with dM.

    Z_h is taken to be the tangential restriction of ``F`` itself, so its
    zeros must already be nondegenerate on dM.
    """
    comps = _components(F, domain)
    if not comps:
        raise EmptyBoundary("M has no boundary to double along")
    zeros = _boundary_zeros(F, P, comps, tol_degenerate, tol_field)
    eps = epsilon if epsilon is not None else _choose_epsilon(domain, interior)
    bounds = _safe_support(comps, eps)
    s_star = min(bounds)
    if s_star <= 0.0:
        raise SupportTooWide("no admissible bump support found at the sampled resolution")
    if s is None:
        s = 0.5 * s_star
    elif s > s_star:
        raise SupportTooWide(f"s={s} exceeds the sampled safe bound {s_star:.6g}")
    D = DoubledField(F, domain, CollarChart(eps, s), comps, zeros, P.order, bounds)
    report = collar_zero_scan(D, tol_field)
    if report <= tol_field:
        raise SupportTooWide(f"doubled field nearly vanishes off the boundary (min {report:.2e}) with s={s}")
    return D


def collar_zero_scan(D: DoubledField, tol_field: float = TOL_FIELD) -> float:
    """Smallest max(|X_h|, |X_v|) over collar samples with v != 0."""
    s, eps = D.collar.s, D.collar.epsilon
    vs = np.geomspace(s / 64.0, eps, 48)
    vs = np.concatenate([-vs[::-1], vs])
    worst = np.inf
    for k, C in enumerate(D.components):
        t = np.linspace(0.0, C.period, THETA_SAMPLES, endpoint=False) if C.period else np.zeros(1)
        TT, VV = np.meshgrid(t, vs, indexing="ij")
        X_h, X_v = D.collar_field(k, TT, VV)
        worst = min(worst, float(np.min(np.maximum(np.abs(X_h), np.abs(X_v)))))
    return worst


def _local_checks(D: DoubledField) -> None:
    """Collar Jacobian and winding oracle at each boundary zero."""
    s = D.collar.s
    for bz in D.boundary_zeros:
        C = D.components[bz.component]
        d = min(s / 8.0, 1e-4)
        if isinstance(C, _EndpointComponent):
            _, wp = D.collar_field(bz.component, np.array([0.0]), np.array([d]))
            _, wm = D.collar_field(bz.component, np.array([0.0]), np.array([-d]))
            j22 = float((wp[0] - wm[0]) / (2 * d))
            bz.jacobian = ((j22,),)
            bz.jacobian_sign = 1 if j22 > 0 else -1
            bz.oracle_index = int((np.sign(wp[0]) - np.sign(wm[0])) // 2)
            continue
        speed = C.speed()
        dt = d / speed
        t0 = bz.param

        def X(a, v):
            return D.collar_field(bz.component, np.atleast_1d(t0 + a / speed), np.atleast_1d(v))

        hp, wp = X(d, 0.0)
        hm, wm = X(-d, 0.0)
        hv, wv = X(0.0, d)
        hn, wn = X(0.0, -d)
        J = np.array(
            [[(hp - hm)[0] / (2 * d), (hv - hn)[0] / (2 * d)], [(wp - wm)[0] / (2 * d), (wv - wn)[0] / (2 * d)]]
        )
        bz.jacobian = tuple(tuple(float(x) for x in row) for row in J)
        det = float(np.linalg.det(J))
        bz.jacobian_sign = 1 if det > 0 else -1
        scale = 1.0 + np.max(np.abs(J))
        if abs(J[0, 1]) > 1e-6 * scale or abs(J[1, 0]) > 1e-6 * scale:
            raise MismatchDetected("collar block structure", f"off-diagonal Jacobian entries at t={t0:.6f}: {J}")
        if abs(J[0, 0] - bz.zh_slope / speed) > 1e-4 * scale or abs(J[1, 1] - bz.vertical) > 1e-3 * scale:
            raise MismatchDetected("collar block structure", f"diagonal Jacobian mismatch at t={t0:.6f}: {J}")
        # winding oracle in the (arclength, v) plane
        others = [abs(((o.param - t0 + C.period / 2) % C.period) - C.period / 2) * speed
                  for o in D.boundary_zeros if o is not bz and o.component == bz.component]
        r = min([s / 4.0] + [g / 4.0 for g in others])

        def planar(pts, _t0=t0, _k=bz.component, _speed=speed):
            h, w = D.collar_field(_k, _t0 + pts[:, 0] / _speed, pts[:, 1])
            return np.column_stack([h, w])

        bz.oracle_index = winding_number(planar, (0.0, 0.0), r)
        del dt


@dataclass
class DoubleReport:
    interior: Fraction  # Ind^orb(Y; Q)
    boundary_upstairs: Fraction
    boundary_downstairs: Fraction
    total: Fraction  # Ind^orb(X; double)
    chi_q: Fraction
    chi_boundary: Fraction
    chi_double: Fraction
    j_plus: Fraction  # Ind^orb(Z_h; R_+)
    j_minus: Fraction  # Ind^orb(Z_h; R_-)
    chain_total: Fraction
    indexstep2: list[Fraction]
    zeros: list[BoundaryZero]
    checks: dict[str, bool]
    collar: CollarChart

    @property
    def passed(self) -> bool:
        return all(self.checks.values())


def verify_double_index(
    D: DoubledField,
    P: QuotientPresentation,
    interior: IndexSum | None = None,
    chain: ExitChain | None = None,
    grid_density: int = 8,
    raise_on_mismatch: bool = True,
) -> DoubleReport:
    """Check the index bookkeeping of the doubled field, all in exact rationals."""
    if interior is None:
        interior = orbifold_index_sum(D.base, P, D.domain, grid_density)
    if chain is None:
        chain = compute_chain(D.base, P, D.domain)
    for r in interior.records:
        if D.domain.boundary_distance(r.location) <= D.collar.epsilon:
            raise SupportTooWide(f"interior zero {r.location} lies inside the collar")
    _local_checks(D)
    G = P.action
    order = P.order

    ind_y = interior.total
    up = Fraction(sum(z.x_index for z in D.boundary_zeros), order)
    pts = [np.array(z.position) for z in D.boundary_zeros]
    seen: set[int] = set()
    down = Fraction(0)
    for i, p in enumerate(pts):
        if i in seen:
            continue
        for a in range(G.order):
            q = G.matrix(a) @ p
            for j, other in enumerate(pts):
                if np.linalg.norm(other - q) < 1e-7:
                    seen.add(j)
        down += D.boundary_zeros[i].orb_index
    total = 2 * ind_y + up

    chi_q = chi_orb(P)
    chi_b = chi_orb(boundary_presentation(P))
    chi_dbl = chi_orb(double_complex(P))
    j_plus = Fraction(sum(z.zh_index for z in D.boundary_zeros if z.region == "+"), order)
    j_minus = Fraction(sum(z.zh_index for z in D.boundary_zeros if z.region == "-"), order)

    lines = [
        chi_q + Fraction(1, 2) * (-chi_b + j_minus - j_plus),
        chi_q + Fraction(1, 2) * (-chi_b + 2 * j_minus - (j_plus + j_minus)),
        chi_q + Fraction(1, 2) * (-2 * chi_b + 2 * j_minus),
        chi_q - chi_b + j_minus,
        (chi_q - chi_b) + j_minus,
    ]
    checks = {
        "sign_rule_jacobian": all(z.jacobian_sign == z.x_index for z in D.boundary_zeros),
        "sign_rule_oracle": all(z.oracle_index == z.x_index for z in D.boundary_zeros),
        "boundary_orbit_sum": up == down,
        "indexstep1": total == 2 * ind_y + j_plus - j_minus,
        "satake_double": total == chi_dbl,
        "additivity_double": chi_dbl == 2 * chi_q - chi_b,
        "satake_boundary": chi_b == j_plus + j_minus,
        "recursion": j_minus == chain.total,
    }
    for k, value in enumerate(lines, start=1):
        checks[f"indexstep2_line{k}"] = value == ind_y
    if raise_on_mismatch:
        for label, ok in checks.items():
            if not ok:
                raise MismatchDetected(label)
    return DoubleReport(
        ind_y, up, down, total, chi_q, chi_b, chi_dbl, j_plus, j_minus, chain.total, lines,
        list(D.boundary_zeros), checks, D.collar,
    )
