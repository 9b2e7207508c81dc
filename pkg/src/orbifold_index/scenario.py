"""Scenario files (JSON, ``"schema": 1``) and their validation.

A scenario names a triangulated manifold M, a finite linear group G acting
on it simplicially, a G-equivariant polynomial/rational field and,
optionally, smooth boundary curves standing in for the PL boundary::

    {
      "schema": 1,
      "name": "disk_z3_radial",
      "complex": {"builtin": "hexagonal_disk"},
      "group": {"generators": [{"rotation_turns": "1/3"}]},
      "field": ["x", "y"],
      "boundary_param": {"circles": [{"center": [0, 0], "radius": 1, "side": 1}]},
      "expected": {"lhs": "1/3"}
    }

``complex`` is either ``{"builtin": name, ...params}`` or explicit
``{"vertices": [[...], ...], "simplices": [[...], ...]}`` with top simplices.
A generator is ``{"matrix": [[...]]}`` or ``{"rotation_turns": "p/q"}`` with an
optional ``"vertex_perm"``; when the permutation is omitted it is read off
by matching vertex coordinates.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from importlib import resources
from pathlib import Path
from typing import Any

import numpy as np

from .errors import OrbifoldError, ParseError, ScenarioParseError, ValidationError
from .geometry import Circle, Domain
from .group_action import GroupElement, close_group, rotation_matrix, trivial_group, validate_codimension2
from .simplicial import QuotientPresentation, SimplicialComplex, boundary_subcomplex, regularize
from .vector_field import (
    TOL_DEDUP,
    TOL_DEGENERATE,
    TOL_EQUIVARIANCE,
    TOL_FIELD,
    TOL_NEWTON,
    FieldExpr,
    check_equivariance,
)

SCHEMA_VERSION = 1
DEFAULT_TOLERANCES = {
    "newton": TOL_NEWTON,
    "dedup": TOL_DEDUP,
    "degenerate": TOL_DEGENERATE,
    "field": TOL_FIELD,
    "equivariance": TOL_EQUIVARIANCE,
}
MATCH_TOL = 1e-7


@dataclass
class Scenario:
    name: str
    description: str
    presentation: QuotientPresentation
    domain: Domain
    field: FieldExpr
    double_field: FieldExpr | None = None
    tolerances: dict[str, float] = field(default_factory=lambda: dict(DEFAULT_TOLERANCES))
    expected: dict[str, Any] = field(default_factory=dict)
    checks: tuple[str, ...] | None = None
    source: str = ""

    @property
    def dim(self) -> int:
        return self.presentation.dim

    @property
    def order(self) -> int:
        return self.presentation.order


# ---------------------------------------------------------------------------
# builtin complexes


def interval(length: float = 1.0) -> SimplicialComplex:
    return SimplicialComplex.from_top([[0.0], [float(length)]], [(0, 1)])


def hexagonal_disk(radius: float = 1.0) -> SimplicialComplex:
    """Centre plus six rim vertices on the circle of the given radius."""
    rim = [[radius * np.cos(k * np.pi / 3), radius * np.sin(k * np.pi / 3)] for k in range(6)]
    return SimplicialComplex.from_top([[0.0, 0.0]] + rim, [(0, 1 + k, 1 + (k + 1) % 6) for k in range(6)])


def annulus(inner: float = 1.0, outer: float = 2.0, segments: int = 6) -> SimplicialComplex:
    """Two rings of ``segments`` vertices joined by ``2 * segments`` triangles."""
    if not 0 < inner < outer or segments < 3:
        raise ValueError("annulus needs 0 < inner < outer and at least 3 segments")
    ang = 2.0 * np.pi * np.arange(segments) / segments
    coords = [[inner * np.cos(a), inner * np.sin(a)] for a in ang]
    coords += [[outer * np.cos(a), outer * np.sin(a)] for a in ang]
    tops = []
    for k in range(segments):
        k1 = (k + 1) % segments
        tops.append((k, k1, segments + k))
        tops.append((k1, segments + k1, segments + k))
    return SimplicialComplex.from_top(coords, tops)


BUILTINS = {"interval": interval, "hexagonal_disk": hexagonal_disk, "annulus": annulus}


# ---------------------------------------------------------------------------
# loading


def _rational(value, path: str) -> Fraction:
    try:
        return Fraction(str(value))
    except (ValueError, ZeroDivisionError):
        raise ValidationError(path, f"not a rational number: {value!r}") from None


def _require(data: dict, key: str, path: str):
    if key not in data:
        raise ValidationError(f"{path}.{key}" if path else key, "missing required field")
    return data[key]


def _build_complex(spec, path: str) -> SimplicialComplex:
    if not isinstance(spec, dict):
        raise ValidationError(path, "expected an object")
    if "builtin" in spec:
        name = spec["builtin"]
        if name not in BUILTINS:
            raise ValidationError(f"{path}.builtin", f"unknown builtin {name!r}; choose from {sorted(BUILTINS)}")
        params = {k: v for k, v in spec.items() if k != "builtin"}
        try:
            return BUILTINS[name](**params)
        except (TypeError, ValueError) as exc:
            raise ValidationError(path, str(exc)) from None
    verts = _require(spec, "vertices", path)
    tops = _require(spec, "simplices", path)
    try:
        coords = np.asarray(verts, dtype=float)
    except (TypeError, ValueError):
        raise ValidationError(f"{path}.vertices", "vertices must be a rectangular list of numbers") from None
    if coords.ndim != 2:
        raise ValidationError(f"{path}.vertices", "vertices must be a list of coordinate lists")
    n = len(coords)
    for i, s in enumerate(tops):
        if not isinstance(s, list) or not all(isinstance(v, int) and 0 <= v < n for v in s):
            raise ValidationError(f"{path}.simplices[{i}]", f"vertex ids must be integers in [0, {n})")
    try:
        return SimplicialComplex.from_top(coords, [tuple(s) for s in tops])
    except OrbifoldError as exc:
        raise ValidationError(path, str(exc)) from None


def _match_perm(K: SimplicialComplex, A: np.ndarray, path: str) -> list[int]:
    X = K.coords
    perm = []
    for v in range(len(X)):
        d = np.linalg.norm(X - A @ X[v], axis=1)
        w = int(np.argmin(d))
        if d[w] > MATCH_TOL:
            raise ValidationError(path, f"matrix does not map vertex {v} onto a vertex")
        perm.append(w)
    return perm


def _build_group(spec, K: SimplicialComplex, path: str):
    n = K.ambient_dim
    if spec is None:
        return trivial_group(n, K.n_ids)
    gens = _require(spec, "generators", path)
    if not isinstance(gens, list):
        raise ValidationError(f"{path}.generators", "expected a list")
    elements = []
    for i, g in enumerate(gens):
        gp = f"{path}.generators[{i}]"
        if "rotation_turns" in g:
            if n != 2:
                raise ValidationError(gp, "rotation_turns needs a planar complex")
            A = rotation_matrix(_rational(g["rotation_turns"], f"{gp}.rotation_turns"))
        else:
            try:
                A = np.asarray(_require(g, "matrix", gp), dtype=float)
            except (TypeError, ValueError):
                raise ValidationError(f"{gp}.matrix", "matrix entries must be numbers") from None
        if A.shape != (n, n):
            raise ValidationError(gp, f"generator must be {n}x{n}, got shape {A.shape}")
        perm = g.get("vertex_perm")
        if perm is None:
            perm = _match_perm(K, A, gp)
        elif len(perm) != K.n_ids:
            raise ValidationError(f"{gp}.vertex_perm", f"expected {K.n_ids} entries")
        try:
            elements.append(GroupElement(A, tuple(int(v) for v in perm)))
        except OrbifoldError as exc:
            raise ValidationError(gp, str(exc)) from None
    try:
        return close_group(elements) if elements else trivial_group(n, K.n_ids)
    except OrbifoldError as exc:
        raise ValidationError(f"{path}.generators", str(exc)) from None


def _build_field(spec, n: int, path: str) -> FieldExpr:
    if not isinstance(spec, list) or not all(isinstance(c, str) for c in spec):
        raise ValidationError(path, "field must be a list of expression strings")
    if len(spec) != n:
        raise ValidationError(path, f"field has {len(spec)} components but the complex lives in R^{n}")
    try:
        return FieldExpr.parse(spec)
    except ParseError as exc:
        raise ValidationError(path, str(exc)) from None


def _build_domain(spec, K: SimplicialComplex, path: str) -> Domain:
    if spec is None:
        return Domain.from_complex(K)
    circles = []
    for i, c in enumerate(_require(spec, "circles", path)):
        cp = f"{path}.circles[{i}]"
        try:
            circles.append(Circle(np.asarray(_require(c, "center", cp), dtype=float),
                                  float(_require(c, "radius", cp)), int(c.get("side", 1))))
        except OrbifoldError as exc:
            raise ValidationError(cp, str(exc)) from None
    if not circles:
        raise ValidationError(f"{path}.circles", "at least one circle is required")
    return Domain.with_circles(K, circles)


def scenario_from_dict(data: dict, source: str = "", tolerances: dict[str, float] | None = None) -> Scenario:
    if not isinstance(data, dict):
        raise ValidationError("", "scenario must be a JSON object")
    if data.get("schema") != SCHEMA_VERSION:
        raise ValidationError("schema", f"expected schema {SCHEMA_VERSION}, got {data.get('schema')!r}")
    name = _require(data, "name", "")
    K = _build_complex(_require(data, "complex", ""), "complex")
    if K.coords is None:
        raise ValidationError("complex", "vertex coordinates are required")
    try:
        boundary_subcomplex(K)
    except OrbifoldError as exc:
        raise ValidationError("complex", str(exc)) from None
    G = _build_group(data.get("group"), K, "group")
    report = validate_codimension2(G)
    if not report.passed:
        raise ValidationError(
            "group.generators",
            f"codimension-2 condition fails: elements fixing a hyperplane {list(report.offenders)}",
        )
    try:
        P = regularize(QuotientPresentation(K, G))
    except OrbifoldError as exc:
        raise ValidationError("group", str(exc)) from None

    tol = dict(DEFAULT_TOLERANCES)
    for k, v in (data.get("tolerances") or {}).items():
        if k not in tol:
            raise ValidationError(f"tolerances.{k}", f"unknown tolerance; known: {sorted(tol)}")
        tol[k] = float(v)
    tol.update(tolerances or {})

    n = K.ambient_dim
    F = _build_field(_require(data, "field", ""), n, "field")
    scale = float(np.max(np.abs(K.coords)))
    eq = check_equivariance(F, G, tol=tol["equivariance"], scale=scale)
    if not eq.passed:
        raise ValidationError("field", f"field is not G-equivariant (max defect {eq.max_violation:.3e})")
    Fd = None
    if data.get("double_field") is not None:
        Fd = _build_field(data["double_field"], n, "double_field")
        if not check_equivariance(Fd, G, tol=tol["equivariance"], scale=scale).passed:
            raise ValidationError("double_field", "field is not G-equivariant")
    try:
        domain = _build_domain(data.get("boundary_param"), P.complex, "boundary_param")
    except OrbifoldError as exc:
        if isinstance(exc, ValidationError):
            raise
        raise ValidationError("boundary_param", str(exc)) from None
    checks = data.get("checks")
    return Scenario(
        name=str(name),
        description=str(data.get("description", "")),
        presentation=P,
        domain=domain,
        field=F,
        double_field=Fd,
        tolerances=tol,
        expected=dict(data.get("expected") or {}),
        checks=tuple(checks) if checks else None,
        source=source,
    )


def load_scenario(path, tolerances: dict[str, float] | None = None) -> Scenario:
    """Load a scenario file, or a bundled catalog entry by name."""
    p = Path(path)
    if not p.exists() and not p.suffix:
        p = catalog_path(str(path))
    try:
        text = p.read_text()
    except OSError as exc:
        raise ScenarioParseError(f"cannot read {path}: {exc.strerror}") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioParseError(f"{p.name}: malformed JSON ({exc.msg} at line {exc.lineno})") from None
    return scenario_from_dict(data, str(p), tolerances)


def catalog_dir() -> Path:
    return Path(str(resources.files("orbifold_index") / "catalog"))


def catalog_path(name: str) -> Path:
    return catalog_dir() / f"{name}.json"


def catalog_names() -> list[str]:
    return sorted(p.stem for p in catalog_dir().glob("*.json"))
