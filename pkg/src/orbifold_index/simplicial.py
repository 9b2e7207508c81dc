"""Simplicial complexes with finite group actions.

Vertices are integer ids ``0..V-1``; simplices are sorted tuples of ids.
Coordinates are optional: quotient complexes and some derived complexes are
purely combinatorial.  Subcomplexes (boundary, fixed sets) keep the vertex
id space of their parent so that group permutations apply unchanged.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    EmptyBoundary,
    InvalidPresentation,
    NotManifold,
    NotSimplicial,
    RequiresRegular,
)
from .group_action import TOL_GROUP, GroupAction, trivial_group, validate_codimension2

Simplex = tuple[int, ...]


def _faces(simplex: Simplex) -> Iterable[Simplex]:
    for k in range(1, len(simplex) + 1):
        yield from combinations(simplex, k)


def _sort_key(s: Simplex) -> tuple:
    return (len(s), s)


@dataclass(frozen=True, eq=False)
class SimplicialComplex:
    coords: np.ndarray | None
    simplices: tuple[Simplex, ...]
    n_ids: int = field(default=-1)

    def __post_init__(self) -> None:
        simplices = tuple(sorted({tuple(sorted(s)) for s in self.simplices}, key=_sort_key))
        object.__setattr__(self, "simplices", simplices)
        object.__setattr__(self, "_set", frozenset(simplices))
        coords = self.coords
        if coords is not None:
            coords = np.array(coords, dtype=float)
            if coords.ndim == 1:
                coords = coords.reshape(-1, 1)
            coords.setflags(write=False)
            object.__setattr__(self, "coords", coords)
        if self.n_ids < 0:
            if coords is not None:
                n_ids = len(coords)
            else:
                n_ids = 1 + max((v for s in simplices for v in s), default=-1)
            object.__setattr__(self, "n_ids", n_ids)
        for s in simplices:
            if any(v < 0 or v >= self.n_ids for v in s):
                raise InvalidPresentation(f"simplex {s} references an unknown vertex")
            if len(s) > 1:
                for face in combinations(s, len(s) - 1):
                    if face not in self._set:
                        raise InvalidPresentation(f"face {face} of {s} missing; complex is not face-closed")

    @classmethod
    def from_top(cls, coords, tops: Iterable[Sequence[int]], n_ids: int = -1) -> "SimplicialComplex":
        faces = set()
        for t in tops:
            t = tuple(sorted(int(v) for v in t))
            if len(set(t)) != len(t):
                raise InvalidPresentation(f"simplex {t} repeats a vertex")
            faces.update(_faces(t))
        return cls(coords, tuple(faces), n_ids)

    def __contains__(self, simplex) -> bool:
        return tuple(sorted(simplex)) in self._set

    def __len__(self) -> int:
        return len(self.simplices)

    @property
    def dim(self) -> int:
        return max((len(s) - 1 for s in self.simplices), default=-1)

    @property
    def ambient_dim(self) -> int:
        return 0 if self.coords is None else self.coords.shape[1]

    def of_dim(self, k: int) -> tuple[Simplex, ...]:
        return tuple(s for s in self.simplices if len(s) == k + 1)

    @property
    def top(self) -> tuple[Simplex, ...]:
        return self.of_dim(self.dim)

    @property
    def vertices(self) -> tuple[int, ...]:
        return tuple(s[0] for s in self.of_dim(0))

    def f_vector(self) -> tuple[int, ...]:
        return tuple(len(self.of_dim(k)) for k in range(self.dim + 1))

    def barycenter(self, simplex: Simplex) -> np.ndarray:
        return self.coords[list(simplex)].mean(axis=0)

    def facet_incidence(self) -> dict[Simplex, int]:
        """Number of top simplices containing each codimension-1 face."""
        d = self.dim
        counts = {f: 0 for f in self.of_dim(d - 1)} if d >= 1 else {}
        for t in self.top:
            for f in combinations(t, d):
                counts[f] += 1
        return counts

    def same_simplices(self, other: "SimplicialComplex") -> bool:
        return self._set == other._set


def euler_characteristic(K) -> int:
    """Alternating simplex (or cell) count."""
    return sum((-1) ** k * n for k, n in enumerate(K.f_vector()))


def barycentric_subdivide(K: SimplicialComplex) -> SimplicialComplex:
    return _subdivide(K)[0]


def _subdivide(K: SimplicialComplex) -> tuple[SimplicialComplex, dict[Simplex, int]]:
    # new vertex ids follow the (dim, lexicographic) order of the old simplices
    vid = {s: i for i, s in enumerate(K.simplices)}
    coords = None
    if K.coords is not None:
        coords = np.array([K.barycenter(s) for s in K.simplices]) if K.simplices else np.zeros((0, K.ambient_dim))
    flags: list[Simplex] = []

    def extend(chain: list[Simplex]) -> None:
        flags.append(tuple(vid[s] for s in chain))
        last = chain[-1]
        if len(last) == 1:
            return
        for face in combinations(last, len(last) - 1):
            extend(chain + [face])

    for t in _maximal(K):
        extend([t])
    return SimplicialComplex.from_top(coords, flags, n_ids=len(vid)), vid


def _maximal(K: SimplicialComplex) -> list[Simplex]:
    covered = set()
    for s in K.simplices:
        if len(s) > 1:
            covered.update(combinations(s, len(s) - 1))
    return [s for s in K.simplices if s not in covered]


# ---------------------------------------------------------------------------
# presentations M/G


@dataclass(frozen=True, eq=False)
class QuotientPresentation:
    """A triangulated compact manifold (possibly with boundary) modulo a finite group."""

    complex: SimplicialComplex
    action: GroupAction
    require_codim2: bool = True
    subdivisions: int = 0
    regular: bool = field(init=False)

    def __post_init__(self) -> None:
        K, G = self.complex, self.action
        if G.n_vertices != K.n_ids:
            raise InvalidPresentation(
                f"action permutes {G.n_vertices} vertex ids but the complex has {K.n_ids}"
            )
        if K.coords is not None and K.ambient_dim != G.dim:
            raise InvalidPresentation("group dimension does not match vertex coordinates")
        for a in range(G.order):
            for s in K.simplices:
                if G.apply_simplex(a, s) not in K:
                    raise NotSimplicial(f"element {a} maps simplex {s} outside the complex")
        if K.coords is not None:
            used = list(K.vertices)
            X = K.coords[used]
            for a in range(G.order):
                image = X @ G.matrix(a).T
                target = K.coords[[G.perm(a)[v] for v in used]]
                if len(used) and np.max(np.abs(image - target)) >= TOL_GROUP:
                    raise InvalidPresentation(f"matrix of element {a} disagrees with its vertex permutation")
        used = set(K.vertices)
        for a in range(1, G.order):
            if all(G.perm(a)[v] == v for v in used) and used:
                raise InvalidPresentation(f"element {a} acts trivially on the complex (non-faithful action)")
        if self.require_codim2:
            report = validate_codimension2(G)
            if not report.passed:
                raise InvalidPresentation(f"fixed sets of codimension < 2 for elements {report.offenders}")
        object.__setattr__(self, "regular", is_regular(K, G))

    @property
    def order(self) -> int:
        return self.action.order

    @property
    def dim(self) -> int:
        return self.complex.dim

    def require_regular(self) -> None:
        if not self.regular:
            raise RequiresRegular("presentation must be regularized first")

    def stabilizer(self, simplex: Simplex) -> tuple[int, ...]:
        """Vertexwise stabilizer of ``simplex``."""
        return tuple(a for a in range(self.order) if self.action.fixes_vertexwise(a, simplex))

    def orbits(self, simplices: Iterable[Simplex] | None = None) -> list[tuple[Simplex, ...]]:
        """G-orbits of simplices, each sorted, ordered by their least member."""
        pool = self.complex.simplices if simplices is None else tuple(simplices)
        seen: set[Simplex] = set()
        out = []
        for s in pool:
            if s in seen:
                continue
            orbit = sorted({self.action.apply_simplex(a, s) for a in range(self.order)}, key=_sort_key)
            seen.update(orbit)
            out.append(tuple(orbit))
        return out


def is_regular(K: SimplicialComplex, G: GroupAction) -> bool:
    for s in K.simplices:
        for a in range(1, G.order):
            if G.apply_simplex(a, s) == s and not G.fixes_vertexwise(a, s):
                return False
    return True


def trivial_presentation(K: SimplicialComplex) -> QuotientPresentation:
    return QuotientPresentation(K, trivial_group(max(K.ambient_dim, 1), K.n_ids))


def subdivide_presentation(P: QuotientPresentation) -> QuotientPresentation:
    K2, vid = _subdivide(P.complex)
    G = P.action
    perms = [tuple(vid[G.apply_simplex(a, s)] for s in P.complex.simplices) for a in range(G.order)]
    return QuotientPresentation(
        K2, G.with_vertex_perms(perms), P.require_codim2, subdivisions=P.subdivisions + 1
    )


def regularize(P: QuotientPresentation, max_subdivisions: int = 2) -> QuotientPresentation:
    """Subdivide until setwise stabilizers fix simplices vertexwise."""
    current = P
    for _ in range(max_subdivisions + 1):
        if current.regular:
            return current
        if current.subdivisions - P.subdivisions >= max_subdivisions:
            break
        current = subdivide_presentation(current)
    raise NotSimplicial(f"action still irregular after {max_subdivisions} barycentric subdivisions")


@dataclass(frozen=True)
class QuotientComplex:
    """Cells are G-orbits of simplices; coordinates are dropped."""

    cells: tuple[tuple[Simplex, ...], ...]
    dims: tuple[int, ...]
    faces: tuple[frozenset[int], ...]

    @property
    def dim(self) -> int:
        return max(self.dims, default=-1)

    def f_vector(self) -> tuple[int, ...]:
        return tuple(self.dims.count(k) for k in range(self.dim + 1))

    def __len__(self) -> int:
        return len(self.cells)


def quotient_complex(P: QuotientPresentation) -> QuotientComplex:
    P.require_regular()
    orbits = P.orbits()
    which = {s: i for i, orb in enumerate(orbits) for s in orb}
    faces = []
    for orb in orbits:
        rep = orb[0]
        faces.append(frozenset(which[f] for f in combinations(rep, len(rep) - 1)) if len(rep) > 1 else frozenset())
    return QuotientComplex(tuple(orbits), tuple(len(o[0]) - 1 for o in orbits), tuple(faces))


def boundary_subcomplex(K: SimplicialComplex) -> SimplicialComplex:
    """Closure of the codimension-1 faces lying in exactly one top simplex."""
    if K.dim <= 0:
        return SimplicialComplex(K.coords, (), K.n_ids)
    incidence = K.facet_incidence()
    bad = [f for f, c in incidence.items() if c > 2]
    if bad:
        raise NotManifold(f"faces {bad[:3]} lie in more than two top simplices")
    free = [f for f, c in incidence.items() if c == 1]
    return SimplicialComplex.from_top(K.coords, free, n_ids=K.n_ids)


def boundary_presentation(P: QuotientPresentation) -> QuotientPresentation:
    B = boundary_subcomplex(P.complex)
    # the boundary of a faithful action need not be faithful (e.g. empty boundary)
    return _restricted(P, B)


def _restricted(P: QuotientPresentation, K: SimplicialComplex) -> QuotientPresentation:
    obj = object.__new__(QuotientPresentation)
    G = P.action
    for a in range(G.order):
        for s in K.simplices:
            if G.apply_simplex(a, s) not in K:
                raise NotSimplicial("subcomplex is not G-invariant")
    object.__setattr__(obj, "complex", K)
    object.__setattr__(obj, "action", G)
    object.__setattr__(obj, "require_codim2", P.require_codim2)
    object.__setattr__(obj, "subdivisions", P.subdivisions)
    object.__setattr__(obj, "regular", is_regular(K, G))
    return obj


def double_complex(P: QuotientPresentation) -> QuotientPresentation:
    """Glue two copies of ``P`` along the boundary, with the diagonal action.

    Interior vertex ``v`` of the second copy becomes ``V + v``; boundary
    vertices are shared.  If some interior simplex has all its vertices on
    the boundary, the copies would share that vertex set, so ``P`` is
    subdivided once first.
    """
    B = boundary_subcomplex(P.complex)
    if not B.simplices:
        raise EmptyBoundary("cannot double a closed complex")
    bverts = set(B.vertices)
    if any(s not in B and all(v in bverts for v in s) for s in P.complex.simplices):
        P = subdivide_presentation(P)
        B = boundary_subcomplex(P.complex)
        bverts = set(B.vertices)
    K = P.complex
    V = K.n_ids

    def prime(v: int) -> int:
        return v if v in bverts else V + v

    simplices = set(K.simplices)
    simplices.update(tuple(sorted(prime(v) for v in s)) for s in K.simplices)
    coords = None if K.coords is None else np.vstack([K.coords, K.coords])
    D = SimplicialComplex(coords, tuple(simplices), 2 * V)
    G = P.action
    perms = []
    for a in range(G.order):
        p = G.perm(a)
        perms.append(tuple(p) + tuple(V + p[v] for v in range(V)))
    return QuotientPresentation(D, G.with_vertex_perms(perms), P.require_codim2, P.subdivisions)


def fixed_subcomplex(P: QuotientPresentation, g: int) -> SimplicialComplex:
    """Simplices fixed vertexwise by element ``g``; equals M^g for regular actions."""
    P.require_regular()
    perm = P.action.perm(g)
    keep = [s for s in P.complex.simplices if all(perm[v] == v for v in s)]
    return SimplicialComplex(P.complex.coords, tuple(keep), P.complex.n_ids)
