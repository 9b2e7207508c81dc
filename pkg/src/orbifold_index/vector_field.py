"""Equivariant vector fields on M: evaluation, zeros, and orbifold indices."""

from __future__ import annotations

import logging
from collections import defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np
from scipy.stats import qmc

from . import expr as ex
from .errors import (
    DegenerateZero,
    EvalError,
    FieldVanishesOnCircle,
    MismatchDetected,
    ZeroOnBoundary,
)
from .geometry import Domain
from .group_action import TOL_GROUP, GroupAction
from .simplicial import QuotientPresentation

log = logging.getLogger(__name__)

TOL_NEWTON = 1e-12
TOL_DEDUP = 1e-6
TOL_DEGENERATE = 1e-9
TOL_FIELD = 1e-9
TOL_EQUIVARIANCE = 1e-8
EQUIVARIANCE_SAMPLES = 64


@dataclass(frozen=True, eq=False)
class FieldExpr:
    components: tuple[ex.Expr, ...]

    def __post_init__(self) -> None:
        n = len(self.components)
        for c in self.components:
            if any(i >= n for i in c.variables()):
                raise ex.ParseError(f"component {c} uses a variable beyond dimension {n}")
        jac = [c.diff(j) for c in self.components for j in range(n)]
        object.__setattr__(self, "_fn", ex.compile_exprs(list(self.components)))
        object.__setattr__(self, "_jac_exprs", tuple(jac))
        object.__setattr__(self, "_jac_fn", ex.compile_exprs(jac))

    @classmethod
    def parse(cls, components: Sequence[str]) -> "FieldExpr":
        n = len(components)
        return cls(tuple(ex.parse(c, n) for c in components))

    @property
    def dim(self) -> int:
        return len(self.components)

    def __call__(self, p) -> np.ndarray:
        return ex.evaluate_scalar(self._fn, p)

    def jacobian(self, p) -> np.ndarray:
        n = self.dim
        return ex.evaluate_scalar(self._jac_fn, p).reshape(n, n)

    def jacobian_exprs(self) -> tuple[tuple[ex.Expr, ...], ...]:
        n = self.dim
        return tuple(self._jac_exprs[i * n : (i + 1) * n] for i in range(n))

    def many(self, points) -> np.ndarray:
        """Vectorized evaluation on an ``(m, n)`` array; returns ``(m, n)``."""
        P = np.atleast_2d(np.asarray(points, dtype=float))
        with np.errstate(all="ignore"):
            vals = self._fn([P[:, i] for i in range(self.dim)])
        return np.column_stack([np.broadcast_to(np.asarray(v, dtype=float), (len(P),)) for v in vals])

    def jacobian_many(self, points) -> np.ndarray:
        P = np.atleast_2d(np.asarray(points, dtype=float))
        n = self.dim
        with np.errstate(all="ignore"):
            vals = self._jac_fn([P[:, i] for i in range(n)])
        flat = np.column_stack([np.broadcast_to(np.asarray(v, dtype=float), (len(P),)) for v in vals])
        return flat.reshape(len(P), n, n)

    def __str__(self) -> str:
        return "(" + ", ".join(str(c) for c in self.components) + ")"


def evaluate(F: FieldExpr, p) -> np.ndarray:
    return F(p)


# ---------------------------------------------------------------------------
# equivariance


@dataclass(frozen=True)
class EquivarianceReport:
    passed: bool
    max_violation: float
    worst_element: int | None = None


def check_equivariance(
    F: FieldExpr,
    G: GroupAction,
    samples: int = EQUIVARIANCE_SAMPLES,
    tol: float = TOL_EQUIVARIANCE,
    scale: float = 1.0,
) -> EquivarianceReport:
    """Check ``g F(p) = F(g p)`` at Halton points of ``[-scale, scale]^n``."""
    if samples < 1:
        raise ValueError("samples must be >= 1")
    n = F.dim
    # skip the first Halton point, which is the corner of the cube
    pts = (2.0 * qmc.Halton(d=n, scramble=False).random(samples + 1)[1:] - 1.0) * scale
    vals = F.many(pts)
    worst, worst_g = 0.0, None
    for a in range(G.order):
        M = G.matrix(a)
        err = np.max(np.abs(vals @ M.T - F.many(pts @ M.T)))
        if not np.isfinite(err):
            err = np.inf
        if err > worst:
            worst, worst_g = float(err), a
    return EquivarianceReport(worst <= tol, worst, worst_g)


# ---------------------------------------------------------------------------
# zeros


@dataclass
class ZeroSearch:
    points: list[np.ndarray]
    diverged: list[tuple[float, ...]] = field(default_factory=list)

    def __iter__(self):
        return iter(self.points)

    def __len__(self) -> int:
        return len(self.points)


def newton(
    F: FieldExpr,
    seed,
    tol: float = TOL_NEWTON,
    max_iter: int = 200,
) -> np.ndarray | None:
    """Damped Newton iteration with the symbolic Jacobian.

    Iterates past the residual threshold until the step itself is tiny, so
    that seeds converging (slowly) to a degenerate zero still land together.
    """
    x = np.array(seed, dtype=float)
    try:
        fx = F(x)
        for _ in range(max_iter):
            r = float(np.linalg.norm(fx))
            if r == 0.0:
                return x
            J = F.jacobian(x)
            step = np.linalg.lstsq(J, -fx, rcond=None)[0]
            t = 1.0
            while True:
                trial = x + t * step
                ft = F(trial)
                if np.linalg.norm(ft) < r or t < 1e-4:
                    break
                t *= 0.5
            x, fx = trial, ft
            if np.linalg.norm(fx) < tol and np.linalg.norm(t * step) < 1e-10:
                return x
    except (EvalError, np.linalg.LinAlgError):
        return None
    return x if np.linalg.norm(fx) < tol else None


def _grid(lo: np.ndarray, hi: np.ndarray, density: int) -> np.ndarray:
    axes = []
    for a, b in zip(lo, hi):
        m = max(2, int(np.ceil((b - a) * density)) + 1)
        # cell centres avoid seeding exactly on symmetric points
        axes.append(a + (np.arange(m) + 0.5) * (b - a) / m)
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.column_stack([m.ravel() for m in mesh])


def find_zeros(
    F: FieldExpr,
    P: QuotientPresentation,
    grid_density: int = 8,
    domain: Domain | None = None,
    tol_newton: float = TOL_NEWTON,
    tol_dedup: float = TOL_DEDUP,
) -> ZeroSearch:
    """Zeros of ``F`` inside M, found by Newton from a seed grid."""
    if grid_density < 2:
        raise ValueError("grid_density must be >= 2 per unit length")
    domain = domain or Domain.from_complex(P.complex)
    lo, hi = domain.bounding_box()
    seeds = [s for s in _grid(lo, hi, grid_density) if domain.contains(s)]
    found: list[np.ndarray] = []
    diverged = []
    for seed in seeds:
        z = newton(F, seed, tol_newton)
        if z is None:
            diverged.append(tuple(seed))
            continue
        if not np.all(np.isfinite(z)):
            diverged.append(tuple(seed))
            continue
        if domain.boundary_distance(z) < tol_dedup:
            raise ZeroOnBoundary(f"zero at {tuple(z)} lies on the boundary")
        if not domain.contains(z):
            continue
        if not any(np.linalg.norm(z - w) < tol_dedup for w in found):
            found.append(z)
    if diverged:
        log.debug("%d Newton seeds diverged", len(diverged))
    found.sort(key=lambda z: tuple(np.round(z, 9)))
    for z in found:
        for a in range(P.order):
            gz = P.action.matrix(a) @ z
            if not any(np.linalg.norm(gz - w) < tol_dedup for w in found):
                raise MismatchDetected("zero set G-invariance", f"image of {tuple(z)} under element {a} missing")
    return ZeroSearch(found, diverged)


# ---------------------------------------------------------------------------
# indices


@dataclass(frozen=True)
class ZeroRecord:
    location: tuple[float, ...]
    isotropy_order: int
    index: int
    orb_index: Fraction
    morse_lambda: int | None = None
    det_sign: int | None = None
    degenerate: bool = False


def morse_lambda(J: np.ndarray) -> int:
    """Number of Jacobian eigenvalues with negative real part, with multiplicity."""
    eig = np.linalg.eigvals(J)
    return int(np.sum(eig.real < 0))


def orbifold_index_at(
    F: FieldExpr,
    z,
    G: GroupAction,
    tol_degenerate: float = TOL_DEGENERATE,
    tol_group: float = TOL_GROUP,
) -> ZeroRecord:
    z = np.asarray(z, dtype=float)
    J = F.jacobian(z)
    det = float(np.linalg.det(J))
    if abs(det) <= tol_degenerate:
        raise DegenerateZero(f"zero at {tuple(z)} has det J = {det:.3e}")
    lam = morse_lambda(J)
    sign = 1 if det > 0 else -1
    if (-1) ** lam != sign:
        raise MismatchDetected("morse sign", f"(-1)^{lam} != sign(det) at {tuple(z)}")
    iso = G.isotropy_order(z, tol_group)
    return ZeroRecord(tuple(float(v) for v in z), iso, sign, Fraction(sign, iso), lam, sign)


def winding_number(
    func: Callable[[np.ndarray], np.ndarray],
    center,
    radius: float,
    min_samples: int = 64,
    tol_field: float = TOL_FIELD,
    max_samples: int = 1 << 20,
) -> int:
    """Degree of ``func / |func|`` on a circle, for a vectorized planar map."""
    c = np.asarray(center, dtype=float)
    m = max(8, int(min_samples))
    while m <= max_samples:
        t = np.linspace(0.0, 2.0 * np.pi, m, endpoint=False)
        pts = c + radius * np.column_stack([np.cos(t), np.sin(t)])
        vals = func(pts)
        norms = np.linalg.norm(vals, axis=1)
        if not np.all(np.isfinite(norms)) or norms.min() <= tol_field:
            raise FieldVanishesOnCircle(f"field vanishes (min |F| = {norms.min():.3e}) on the circle")
        ang = np.arctan2(vals[:, 1], vals[:, 0])
        d = np.diff(np.concatenate([ang, ang[:1]]))
        d = (d + np.pi) % (2.0 * np.pi) - np.pi
        if np.max(np.abs(d)) < np.pi / 2:
            return int(round(float(d.sum()) / (2.0 * np.pi)))
        m *= 2
    raise FieldVanishesOnCircle("angular steps did not resolve; field is too wild on this circle")


def winding_number_2d(
    F: FieldExpr,
    center,
    radius: float,
    min_samples: int = 64,
    tol_field: float = TOL_FIELD,
) -> int:
    if F.dim != 2:
        raise ValueError("winding numbers are planar")
    return winding_number(F.many, center, radius, min_samples, tol_field)


def degenerate_index(F: FieldExpr, z, radius: float, tol_field: float = TOL_FIELD) -> int:
    """Topological index of an isolated zero without using the Jacobian."""
    z = np.asarray(z, dtype=float)
    if F.dim == 1:
        left, right = F(z - radius)[0], F(z + radius)[0]
        if min(abs(left), abs(right)) <= tol_field:
            raise FieldVanishesOnCircle("field vanishes at the probe points")
        return int((np.sign(right) - np.sign(left)) // 2)
    if F.dim == 2:
        return winding_number_2d(F, z, radius, tol_field=tol_field)
    raise DegenerateZero("degenerate zeros are only resolved in dimension 1 and 2")


@dataclass
class IndexSum:
    records: list[ZeroRecord]
    orbits: list[tuple[int, ...]]
    total: Fraction
    order: int

    @property
    def representatives(self) -> list[ZeroRecord]:
        return [self.records[o[0]] for o in self.orbits]


def zero_orbits(points: Sequence[np.ndarray], G: GroupAction, tol: float = TOL_DEDUP) -> list[tuple[int, ...]]:
    seen: set[int] = set()
    orbits = []
    for i, z in enumerate(points):
        if i in seen:
            continue
        members = set()
        for a in range(G.order):
            gz = G.matrix(a) @ np.asarray(z)
            for j, w in enumerate(points):
                if np.linalg.norm(gz - np.asarray(w)) < tol:
                    members.add(j)
        seen.update(members)
        orbits.append(tuple(sorted(members)))
    return orbits


def index_records(
    F: FieldExpr,
    zeros: Sequence[np.ndarray],
    G: GroupAction,
    domain: Domain | None = None,
    tol_degenerate: float = TOL_DEGENERATE,
    tol_field: float = TOL_FIELD,
) -> list[ZeroRecord]:
    records = []
    for i, z in enumerate(zeros):
        try:
            records.append(orbifold_index_at(F, z, G, tol_degenerate))
        except DegenerateZero:
            others = [np.linalg.norm(z - w) for j, w in enumerate(zeros) if j != i]
            radius = min([0.1] + [d / 4 for d in others])
            if domain is not None:
                radius = min(radius, domain.boundary_distance(z) / 2)
            w = degenerate_index(F, z, radius, tol_field)
            iso = G.isotropy_order(z)
            records.append(ZeroRecord(tuple(float(v) for v in z), iso, w, Fraction(w, iso), degenerate=True))
    return records


def orbifold_index_sum(
    F: FieldExpr,
    P: QuotientPresentation,
    domain: Domain | None = None,
    grid_density: int = 8,
    tol_newton: float = TOL_NEWTON,
    tol_dedup: float = TOL_DEDUP,
    tol_degenerate: float = TOL_DEGENERATE,
    tol_field: float = TOL_FIELD,
) -> IndexSum:
    """Sum of orbifold indices over zeros of the field on M/G."""
    domain = domain or Domain.from_complex(P.complex)
    zeros = find_zeros(F, P, grid_density, domain, tol_newton, tol_dedup).points
    records = index_records(F, zeros, P.action, domain, tol_degenerate, tol_field)
    orbits = zero_orbits(zeros, P.action, tol_dedup)
    total = sum((records[o[0]].orb_index for o in orbits), Fraction(0))
    upstairs = Fraction(sum(r.index for r in records), P.order)
    if total != upstairs:
        raise MismatchDetected("orbit-stabilizer index", f"orbit sum {total} != upstairs/|G| = {upstairs}")
    for o in orbits:
        if len(o) * records[o[0]].isotropy_order != P.order:
            raise MismatchDetected("orbit-stabilizer", f"orbit {o} has the wrong size")
    return IndexSum(records, orbits, total, P.order)


def morse_counts(result: IndexSum) -> dict[int, Fraction]:
    """C_lambda: isotropy-weighted count of orbit zeros with Morse index lambda."""
    counts: dict[int, Fraction] = defaultdict(Fraction)
    for rec in result.representatives:
        if rec.morse_lambda is None:
            raise DegenerateZero("Morse counts need non-degenerate zeros only")
        counts[rec.morse_lambda] += Fraction(1, rec.isotropy_order)
    return dict(sorted(counts.items()))


def sigma_orb(result: IndexSum) -> Fraction:
    return sum((Fraction((-1) ** lam) * c for lam, c in morse_counts(result).items()), Fraction(0))
