"""Geometric realization of the manifold M: membership, boundary curves, normals.

A ``Domain`` is either the PL realization of the complex itself or, when a
scenario supplies smooth boundary curves, the region those curves bound.
Boundary curves are oriented with M on their left, so the outward normal of
a curve with unit tangent ``(tx, ty)`` is ``(ty, -tx)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import InvalidPresentation, UnsupportedDimension
from .simplicial import SimplicialComplex, boundary_subcomplex


class Curve:
    """Closed boundary curve parameterized on ``[0, period)``."""

    period: float

    def point(self, t):
        raise NotImplementedError

    def tangent(self, t):
        raise NotImplementedError

    def speed(self, t):
        raise NotImplementedError

    def normal(self, t):
        tan = self.tangent(t)
        return np.stack([tan[..., 1], -tan[..., 0]], axis=-1)

    def corners(self) -> np.ndarray:
        return np.zeros(0)


@dataclass(frozen=True, eq=False)
class Circle(Curve):
    center: np.ndarray
    radius: float
    # +1: M lies inside the circle, -1: M lies outside it
    side: int = 1

    def __post_init__(self) -> None:
        object.__setattr__(self, "center", np.asarray(self.center, dtype=float))
        if self.radius <= 0 or self.side not in (1, -1):
            raise InvalidPresentation("circle needs positive radius and side +1 or -1")

    @property
    def period(self) -> float:
        return 2.0 * np.pi

    def point(self, t):
        t = np.asarray(t, dtype=float)
        u = np.stack([np.cos(t), self.side * np.sin(t)], axis=-1)
        return self.center + self.radius * u

    def tangent(self, t):
        t = np.asarray(t, dtype=float)
        return np.stack([-np.sin(t), self.side * np.cos(t)], axis=-1)

    def speed(self, t):
        return np.full(np.shape(t), self.radius)

    def inward_point(self, t, depth):
        """Point at distance ``depth`` from the curve on the M side."""
        return self.point(t) - np.asarray(depth)[..., None] * self.normal(t)

    def signed_depth(self, p) -> np.ndarray:
        r = np.linalg.norm(np.asarray(p, dtype=float) - self.center, axis=-1)
        return self.side * (self.radius - r)


@dataclass(frozen=True, eq=False)
class Polyline(Curve):
    """Closed PL loop by arclength; normals are constant on each facet."""

    vertices: np.ndarray

    def __post_init__(self) -> None:
        v = np.asarray(self.vertices, dtype=float)
        object.__setattr__(self, "vertices", v)
        edges = np.roll(v, -1, axis=0) - v
        lengths = np.linalg.norm(edges, axis=1)
        object.__setattr__(self, "_edges", edges)
        object.__setattr__(self, "_lengths", lengths)
        object.__setattr__(self, "_starts", np.concatenate([[0.0], np.cumsum(lengths)[:-1]]))

    @property
    def period(self) -> float:
        return float(np.sum(self._lengths))

    def _locate(self, t):
        t = np.mod(np.asarray(t, dtype=float), self.period)
        k = np.clip(np.searchsorted(self._starts, t, side="right") - 1, 0, len(self._lengths) - 1)
        return k, t - self._starts[k]

    def point(self, t):
        k, s = self._locate(t)
        return self.vertices[k] + (s / self._lengths[k])[..., None] * self._edges[k]

    def tangent(self, t):
        k, _ = self._locate(t)
        return self._edges[k] / self._lengths[k][..., None]

    def speed(self, t):
        return np.ones(np.shape(t))

    def corners(self) -> np.ndarray:
        return self._starts.copy()

    def distance(self, p) -> float:
        p = np.asarray(p, dtype=float)
        best = np.inf
        for a, e, L in zip(self.vertices, self._edges, self._lengths):
            s = np.clip(np.dot(p - a, e) / (L * L), 0.0, 1.0)
            best = min(best, float(np.linalg.norm(p - (a + s * e))))
        return best


@dataclass(frozen=True)
class Endpoint:
    """Boundary point of a 1-dimensional M with its outward direction (+1 or -1)."""

    vertex: int
    x: float
    outward: int


class Domain:
    def __init__(
        self,
        complex: SimplicialComplex,
        curves: Sequence[Curve] | None = None,
        endpoints: Sequence[Endpoint] | None = None,
        smooth: bool = False,
    ) -> None:
        self.complex = complex
        self.dim = complex.dim
        self.curves = tuple(curves or ())
        self.endpoints = tuple(endpoints or ())
        self.smooth = smooth

    # construction --------------------------------------------------------
    @classmethod
    def from_complex(cls, K: SimplicialComplex) -> "Domain":
        if K.coords is None:
            raise InvalidPresentation("a geometric domain needs vertex coordinates")
        if K.dim == 1 and K.ambient_dim == 1:
            return cls(K, endpoints=_endpoints(K))
        if K.dim == 2 and K.ambient_dim == 2:
            return cls(K, curves=_pl_loops(K))
        raise UnsupportedDimension(f"no geometric domain for a {K.dim}-complex in R^{K.ambient_dim}")

    @classmethod
    def with_circles(cls, K: SimplicialComplex, circles: Sequence[Circle]) -> "Domain":
        if K.dim != 2 or K.ambient_dim != 2:
            raise UnsupportedDimension("smooth circle boundaries need a 2-complex in R^2")
        return cls(K, curves=circles, smooth=True)

    # queries -------------------------------------------------------------
    def bounding_box(self) -> tuple[np.ndarray, np.ndarray]:
        if self.smooth:
            lo = np.min([c.center - c.radius for c in self.curves if c.side == 1], axis=0)
            hi = np.max([c.center + c.radius for c in self.curves if c.side == 1], axis=0)
            return lo, hi
        X = self.complex.coords[list(self.complex.vertices)]
        return X.min(axis=0), X.max(axis=0)

    def contains(self, p) -> bool:
        p = np.asarray(p, dtype=float)
        if self.smooth:
            return all(float(c.signed_depth(p)) >= 0.0 for c in self.curves)
        K = self.complex
        for s in K.top:
            X = K.coords[list(s)]
            if K.dim == 1:
                lo, hi = sorted(X[:, 0])
                if lo - 1e-12 <= p[0] <= hi + 1e-12:
                    return True
                continue
            T = np.column_stack([X[1] - X[0], X[2] - X[0]])
            lam = np.linalg.solve(T, p - X[0])
            if lam.min() >= -1e-12 and lam.sum() <= 1 + 1e-12:
                return True
        return False

    def boundary_distance(self, p) -> float:
        p = np.asarray(p, dtype=float)
        if self.dim == 1:
            return min((abs(p[0] - e.x) for e in self.endpoints), default=np.inf)
        best = np.inf
        for c in self.curves:
            if isinstance(c, Circle):
                best = min(best, abs(float(c.signed_depth(p))))
            else:
                best = min(best, c.distance(p))
        return best


def _endpoints(K: SimplicialComplex) -> tuple[Endpoint, ...]:
    B = boundary_subcomplex(K)
    out = []
    for v in B.vertices:
        edge = next(e for e in K.of_dim(1) if v in e)
        other = edge[0] if edge[1] == v else edge[1]
        x = float(K.coords[v, 0])
        out.append(Endpoint(v, x, 1 if x > K.coords[other, 0] else -1))
    return tuple(out)


def _pl_loops(K: SimplicialComplex) -> tuple[Polyline, ...]:
    B = boundary_subcomplex(K)
    succ: dict[int, int] = {}
    for a, b in B.of_dim(1):
        tri = next(t for t in K.top if a in t and b in t)
        c = next(v for v in tri if v not in (a, b))
        pa, pb, pc = K.coords[a], K.coords[b], K.coords[c]
        cross = (pb[0] - pa[0]) * (pc[1] - pa[1]) - (pb[1] - pa[1]) * (pc[0] - pa[0])
        if cross < 0:
            a, b = b, a
        succ[a] = b
    loops = []
    remaining = set(succ)
    while remaining:
        start = min(remaining)
        loop = [start]
        remaining.discard(start)
        v = succ[start]
        while v != start:
            loop.append(v)
            remaining.discard(v)
            v = succ[v]
        loops.append(Polyline(K.coords[loop]))
    return tuple(loops)
