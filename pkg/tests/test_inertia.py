from fractions import Fraction

import numpy as np
import pytest

from orbifold_index.errors import TangencyViolation
from orbifold_index.euler_satake import chi_orb, chi_underlying
from orbifold_index.group_action import GroupElement, close_group
from orbifold_index.inertia import (
    _check_tangency,
    _fixed_basis,
    build_sectors,
    check_boundary_compatibility,
    check_double_commutation,
    chi_orb_inertia,
    verify_corollary,
)
from orbifold_index.scenario import catalog_names, load_scenario
from orbifold_index.simplicial import QuotientPresentation, SimplicialComplex, regularize
from orbifold_index.vector_field import FieldExpr
from test_simplicial import rotation_presentation


def octahedral_sphere():
    V = np.array([[1, 0, 0], [-1, 0, 0], [0, 1, 0], [0, -1, 0], [0, 0, 1], [0, 0, -1]], float)
    K = SimplicialComplex.from_top(V, [(a, b, c) for a in (0, 1) for b in (2, 3) for c in (4, 5)])

    def element(M):
        M = np.array(M, float)
        return GroupElement(M, tuple(int(np.argmin(np.linalg.norm(V - M @ v, axis=1))) for v in V))

    quarter = element([[0, -1, 0], [1, 0, 0], [0, 0, 1]])
    cycle = element([[0, 0, 1], [1, 0, 0], [0, 1, 0]])
    return regularize(QuotientPresentation(K, close_group([quarter, cycle])))


def test_z3_sectors(z3):
    sectors = build_sectors(z3)
    assert len(sectors) == 3
    assert sectors[0].untwisted and sectors[0].chi_orb_value == Fraction(1, 3)
    for s in sectors[1:]:
        # a nontrivial rotation fixes only the centre
        assert s.chi_fixed == 1 and s.centralizer_order == 3 and s.class_size == 1
    assert chi_orb_inertia(z3) == 1 == chi_underlying(z3)


def test_z2_and_trivial(z2, trivial):
    assert [s.chi_orb_value for s in build_sectors(z2)] == [Fraction(1, 2), Fraction(1, 2)]
    assert [s.chi_orb_value for s in build_sectors(trivial)] == [Fraction(1)]
    assert chi_orb_inertia(trivial) == chi_orb(trivial) == 1


def test_octahedral_sphere():
    P = octahedral_sphere()
    assert P.order == 24
    sectors = build_sectors(P)
    assert sorted(s.class_size for s in sectors) == [1, 3, 6, 6, 8]
    assert sum(s.class_size for s in sectors) == 24
    assert chi_orb(P) == Fraction(1, 12)
    assert chi_orb_inertia(P) == 2 == chi_underlying(P)


@pytest.mark.parametrize("name", catalog_names())
def test_catalog_inertia_equals_underlying(name):
    P = load_scenario(name).presentation
    assert chi_orb_inertia(P) == chi_underlying(P)


@pytest.mark.parametrize("nk", [(6, 3), (6, 6), (8, 4)])
def test_boundary_and_double(nk):
    P = rotation_presentation(*nk)
    assert check_boundary_compatibility(P)
    d, q, b = check_double_commutation(P)
    # the double of a disk mod Z_k is a sphere whose underlying space is S^2
    assert (d, q, b) == (2, 1, 0)


def test_corollary_on_z3_radial():
    s = load_scenario("disk_z3_radial")
    R = verify_corollary(s.field, s.presentation, s.domain)
    assert R.passed and R.lhs == R.rhs == 1
    assert R.relative_underlying == 1 and R.chain_underlying == [0, 0]
    assert [sec.fixed_dim for sec in R.sectors] == [2, 0, 0]


def test_corollary_on_z2_saddle():
    s = load_scenario("disk_z2_saddle")
    R = verify_corollary(s.field, s.presentation, s.domain)
    # untwisted sector -1/2, twisted sector +1/2 from the 0-dimensional fixed point
    assert [sec.total for sec in R.sectors] == [Fraction(-1, 2), Fraction(1, 2)]
    assert R.lhs == 0 == R.relative_underlying + sum(R.chain_underlying)
    assert R.chain_underlying == [-1, 0]
    assert R.passed


def test_tangency_violation():
    P = octahedral_sphere()
    axis = np.array([[0.0], [0.0], [1.0]])
    K = P.complex
    # a field along the z-axis is tangent to the fixed axis; a sideways field is not
    _check_tangency(FieldExpr.parse(["0", "0", "z"]), K, axis, [], 1e-9)
    with pytest.raises(TangencyViolation):
        _check_tangency(FieldExpr.parse(["1", "0", "z"]), K, axis, [], 1e-9)


def test_fixed_basis():
    assert _fixed_basis(np.eye(2)).shape == (2, 2)
    assert _fixed_basis(-np.eye(2)).shape == (2, 0)
    B = _fixed_basis(np.diag([1.0, -1.0]))
    assert np.allclose(np.abs(B.ravel()), [1.0, 0.0])
