"""Finite groups acting orthogonally on R^n and simplicially on a vertex set.

Elements carry both a real matrix and a vertex permutation.  The matrix is
only used for vector-field geometry; every combinatorial computation (and
therefore every exact Euler characteristic) goes through the permutations.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .errors import InvalidPresentation, NotOrthogonal, OrderExceeded

TOL_GROUP = 1e-9
MAX_ORDER = 512


def _frozen(matrix) -> np.ndarray:
    arr = np.array(matrix, dtype=float)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise InvalidPresentation(f"group matrix must be square, got shape {arr.shape}")
    arr.setflags(write=False)
    return arr


def rotation_matrix(turns: Fraction | float) -> np.ndarray:
    """Planar rotation by ``turns`` full revolutions."""
    angle = 2.0 * np.pi * float(turns)
    c, s = np.cos(angle), np.sin(angle)
    # snap the entries that are exactly 0 or +-1 for rational angles
    return np.array([[c, -s], [s, c]]).round(15) + 0.0


@dataclass(frozen=True, eq=False)
class GroupElement:
    matrix: np.ndarray
    vertex_perm: tuple[int, ...] = ()
    id: int = -1

    def __post_init__(self) -> None:
        object.__setattr__(self, "matrix", _frozen(self.matrix))
        perm = tuple(int(v) for v in self.vertex_perm)
        if sorted(perm) != list(range(len(perm))):
            raise InvalidPresentation(f"vertex_perm {perm} is not a bijection")
        object.__setattr__(self, "vertex_perm", perm)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def is_orthogonal(self, tol: float = TOL_GROUP) -> bool:
        m = self.matrix
        return float(np.max(np.abs(m.T @ m - np.eye(self.dim)), initial=0.0)) < tol


def _compose(p: tuple[int, ...], q: tuple[int, ...]) -> tuple[int, ...]:
    # (p o q)(v) = p(q(v))
    return tuple(p[v] for v in q)


class _MatrixIndex:
    """Lookup of elements by matrix, tolerant to float drift."""

    def __init__(self, tol: float) -> None:
        self.tol = tol
        self.buckets: dict[tuple, list[int]] = {}
        self.mats: list[np.ndarray] = []

    def _key(self, m: np.ndarray) -> tuple:
        return tuple(np.round(m, 6).ravel() + 0.0)

    def add(self, m: np.ndarray) -> int:
        self.mats.append(m)
        idx = len(self.mats) - 1
        self.buckets.setdefault(self._key(m), []).append(idx)
        return idx

    def find(self, m: np.ndarray) -> int | None:
        for idx in self.buckets.get(self._key(m), ()):
            if np.max(np.abs(self.mats[idx] - m)) < self.tol:
                return idx
        # rounding may split near-equal matrices across buckets
        for idx, other in enumerate(self.mats):
            if np.max(np.abs(other - m)) < self.tol:
                return idx
        return None


@dataclass(frozen=True, eq=False)
class GroupAction:
    elements: tuple[GroupElement, ...]
    mult_table: tuple[tuple[int, ...], ...]
    dim: int
    parent_ids: tuple[int, ...] | None = None
    _inverse: tuple[int, ...] = field(default=(), repr=False)

    def __post_init__(self) -> None:
        if not self._inverse:
            inv = []
            for a in range(len(self.elements)):
                row = self.mult_table[a]
                inv.append(row.index(0))
            object.__setattr__(self, "_inverse", tuple(inv))

    # basic queries ---------------------------------------------------------
    @property
    def order(self) -> int:
        return len(self.elements)

    def __len__(self) -> int:
        return len(self.elements)

    @property
    def n_vertices(self) -> int:
        return len(self.elements[0].vertex_perm)

    def mult(self, a: int, b: int) -> int:
        return self.mult_table[a][b]

    def inv(self, a: int) -> int:
        return self._inverse[a]

    def matrix(self, a: int) -> np.ndarray:
        return self.elements[a].matrix

    def perm(self, a: int) -> tuple[int, ...]:
        return self.elements[a].vertex_perm

    def is_abelian(self) -> bool:
        n = self.order
        return all(self.mult(a, b) == self.mult(b, a) for a in range(n) for b in range(n))

    # actions ---------------------------------------------------------------
    def apply_simplex(self, a: int, simplex: Iterable[int]) -> tuple[int, ...]:
        perm = self.elements[a].vertex_perm
        return tuple(sorted(perm[v] for v in simplex))

    def fixes_vertexwise(self, a: int, simplex: Iterable[int]) -> bool:
        perm = self.elements[a].vertex_perm
        return all(perm[v] == v for v in simplex)

    def isotropy(self, point, tol: float = TOL_GROUP) -> tuple[int, ...]:
        """Indices of the elements whose matrix fixes ``point``."""
        p = np.asarray(point, dtype=float)
        return tuple(
            a for a, g in enumerate(self.elements) if np.max(np.abs(g.matrix @ p - p), initial=0.0) < tol
        )

    def isotropy_order(self, point, tol: float = TOL_GROUP) -> int:
        return len(self.isotropy(point, tol))

    # derived actions -------------------------------------------------------
    def subgroup(self, indices: Sequence[int]) -> "GroupAction":
        idx = sorted(set(indices))
        if idx[0] != 0:
            raise InvalidPresentation("subgroup must contain the identity")
        pos = {a: i for i, a in enumerate(idx)}
        elements = tuple(
            GroupElement(self.elements[a].matrix, self.elements[a].vertex_perm, i) for i, a in enumerate(idx)
        )
        try:
            table = tuple(tuple(pos[self.mult(a, b)] for b in idx) for a in idx)
        except KeyError:
            raise InvalidPresentation("indices are not closed under multiplication") from None
        parents = tuple(self.parent_ids[a] for a in idx) if self.parent_ids else tuple(idx)
        return GroupAction(elements, table, self.dim, parent_ids=parents)

    def with_vertex_perms(self, perms: Sequence[Sequence[int]]) -> "GroupAction":
        """Same abstract group and matrices, acting on a new vertex set."""
        if len(perms) != self.order:
            raise InvalidPresentation("one permutation per element required")
        elements = tuple(GroupElement(g.matrix, tuple(p), g.id) for g, p in zip(self.elements, perms))
        for a in range(self.order):
            for b in range(self.order):
                if _compose(elements[a].vertex_perm, elements[b].vertex_perm) != elements[self.mult(a, b)].vertex_perm:
                    raise InvalidPresentation("extended permutations do not respect the multiplication table")
        return GroupAction(elements, self.mult_table, self.dim, self.parent_ids, self._inverse)

    def is_faithful_on_vertices(self) -> bool:
        ident = tuple(range(self.n_vertices))
        return all(g.vertex_perm != ident for g in self.elements[1:])


def trivial_group(dim: int, n_vertices: int = 0) -> GroupAction:
    e = GroupElement(np.eye(dim), tuple(range(n_vertices)), 0)
    return GroupAction((e,), ((0,),), dim)


def close_group(
    generators: Sequence[GroupElement],
    max_order: int = MAX_ORDER,
    tol: float = TOL_GROUP,
) -> GroupAction:
    """Generate the finite group spanned by ``generators``.

    The identity gets index 0; the rest follow in breadth-first order of
    discovery, which keeps element numbering reproducible.
    """
    if max_order < 1:
        raise ValueError("max_order must be >= 1")
    if not generators:
        raise InvalidPresentation("at least one generator is required")
    dim = generators[0].dim
    nv = len(generators[0].vertex_perm)
    for g in generators:
        if g.dim != dim:
            raise InvalidPresentation("generators act on different dimensions")
        if len(g.vertex_perm) != nv:
            raise InvalidPresentation("generators permute different vertex sets")
        if not g.is_orthogonal(tol):
            raise NotOrthogonal("generator matrix is not orthogonal")
    for i in range(len(generators)):
        for j in range(i):
            if np.max(np.abs(generators[i].matrix - generators[j].matrix)) < tol:
                raise InvalidPresentation(f"generators {j} and {i} coincide")

    index = _MatrixIndex(tol)
    mats: list[np.ndarray] = []
    perms: list[tuple[int, ...]] = []

    def add(m: np.ndarray, p: tuple[int, ...]) -> None:
        if len(mats) >= max_order:
            raise OrderExceeded(f"group closure exceeds max_order={max_order}")
        if float(np.max(np.abs(m.T @ m - np.eye(dim)), initial=0.0)) >= tol:
            raise NotOrthogonal("product drifted away from O(n)")
        index.add(m)
        mats.append(m)
        perms.append(p)

    add(np.eye(dim), tuple(range(nv)))
    frontier = [0]
    while frontier:
        nxt = []
        for a in frontier:
            for g in generators:
                m = mats[a] @ g.matrix
                p = _compose(perms[a], g.vertex_perm)
                hit = index.find(m)
                if hit is None:
                    add(m, p)
                    nxt.append(len(mats) - 1)
                elif perms[hit] != p:
                    raise InvalidPresentation("vertex permutations are not determined by the matrices")
        frontier = nxt

    n = len(mats)
    table = []
    for a in range(n):
        row = []
        for b in range(n):
            hit = index.find(mats[a] @ mats[b])
            if hit is None:
                raise NotOrthogonal("multiplication table failed to close within tolerance")
            if perms[hit] != _compose(perms[a], perms[b]):
                raise InvalidPresentation("vertex permutations do not compose consistently")
            row.append(hit)
        table.append(tuple(row))
    elements = tuple(GroupElement(mats[i], perms[i], i) for i in range(n))
    return GroupAction(elements, tuple(table), dim)


def conjugacy_classes(G: GroupAction) -> list[tuple[int, ...]]:
    """Partition of element indices into conjugacy classes, ordered by least member."""
    seen: set[int] = set()
    classes = []
    for g in range(G.order):
        if g in seen:
            continue
        cls = sorted({G.mult(G.mult(k, g), G.inv(k)) for k in range(G.order)})
        seen.update(cls)
        classes.append(tuple(cls))
    return classes


def centralizer(G: GroupAction, g: int) -> GroupAction:
    """The subgroup {k : kg = gk}, with its table inherited from ``G``."""
    members = [k for k in range(G.order) if G.mult(k, g) == G.mult(g, k)]
    return G.subgroup(members)


@dataclass(frozen=True)
class Codim2Report:
    passed: bool
    # (element index, dimension of its fixed subspace)
    offenders: tuple[tuple[int, int], ...] = ()


def fixed_space_dim(matrix: np.ndarray, tol: float = TOL_GROUP) -> int:
    n = matrix.shape[0]
    if n == 0:
        return 0
    sv = np.linalg.svd(matrix - np.eye(n), compute_uv=False)
    return int(np.sum(sv < tol))


def validate_codimension2(G: GroupAction, tol: float = TOL_GROUP) -> Codim2Report:
    offenders = []
    for a in range(1, G.order):
        d = fixed_space_dim(G.matrix(a), tol)
        if d > G.dim - 2:
            offenders.append((a, d))
    return Codim2Report(not offenders, tuple(offenders))
