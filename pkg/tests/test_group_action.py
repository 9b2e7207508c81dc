from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from orbifold_index.errors import InvalidPresentation, NotOrthogonal, OrderExceeded
from orbifold_index.group_action import (
    GroupElement,
    centralizer,
    close_group,
    conjugacy_classes,
    fixed_space_dim,
    rotation_matrix,
    trivial_group,
    validate_codimension2,
)


def cyclic(n: int):
    return close_group([GroupElement(rotation_matrix(Fraction(1, n)))])


def dihedral(n: int):
    refl = np.array([[1.0, 0.0], [0.0, -1.0]])
    return close_group([GroupElement(rotation_matrix(Fraction(1, n))), GroupElement(refl)])


def octahedral():
    rz = np.array([[0.0, -1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 1.0]])
    rx = np.array([[1.0, 0.0, 0.0], [0.0, 0.0, -1.0], [0.0, 1.0, 0.0]])
    return close_group([GroupElement(rz), GroupElement(rx)])


def test_identity_first_and_table_is_latin_square():
    G = dihedral(4)
    assert np.allclose(G.matrix(0), np.eye(2))
    for row in G.mult_table:
        assert sorted(row) == list(range(G.order))
    for col in zip(*G.mult_table):
        assert sorted(col) == list(range(G.order))


@pytest.mark.parametrize("n", [1, 2, 3, 4, 6, 12])
def test_cyclic_order_and_abelian(n):
    G = cyclic(n)
    assert G.order == n
    assert G.is_abelian()
    assert len(conjugacy_classes(G)) == n


@pytest.mark.parametrize("n,classes", [(3, 3), (4, 5), (5, 4), (6, 6)])
def test_dihedral_class_count(n, classes):
    # D_n has (n + 3)/2 classes for odd n and n/2 + 3 for even n
    G = dihedral(n)
    assert G.order == 2 * n
    assert not G.is_abelian()
    assert len(conjugacy_classes(G)) == classes


def test_octahedral_rotation_group():
    G = octahedral()
    assert G.order == 24
    sizes = sorted(len(c) for c in conjugacy_classes(G))
    assert sizes == [1, 3, 6, 6, 8]
    assert validate_codimension2(G).passed


@settings(max_examples=25, deadline=None)
@given(st.integers(min_value=2, max_value=9))
def test_class_size_times_centralizer_is_order(n):
    G = dihedral(n)
    for cls in conjugacy_classes(G):
        for g in cls:
            assert len(cls) * centralizer(G, g).order == G.order


@settings(max_examples=25, deadline=None)
@given(st.integers(min_value=1, max_value=9), st.data())
def test_inverse_and_associativity(n, data):
    G = dihedral(n)
    a = data.draw(st.integers(0, G.order - 1))
    b = data.draw(st.integers(0, G.order - 1))
    c = data.draw(st.integers(0, G.order - 1))
    assert G.mult(a, G.inv(a)) == 0
    assert G.mult(G.mult(a, b), c) == G.mult(a, G.mult(b, c))
    assert np.allclose(G.matrix(G.mult(a, b)), G.matrix(a) @ G.matrix(b))


def test_classes_partition_the_group():
    G = octahedral()
    members = sorted(g for cls in conjugacy_classes(G) for g in cls)
    assert members == list(range(G.order))


def test_order_exceeded():
    with pytest.raises(OrderExceeded):
        close_group([GroupElement(rotation_matrix(Fraction(1, 600)))])


def test_non_orthogonal_generator():
    with pytest.raises(NotOrthogonal):
        close_group([GroupElement(np.array([[2.0, 0.0], [0.0, 0.5]]))])


def test_inconsistent_permutations_rejected():
    # the half turn squared is the identity, but (0 1 2) squared is not
    with pytest.raises(InvalidPresentation):
        close_group([GroupElement(-np.eye(2), (1, 2, 0))])


def test_perm_must_be_bijection():
    with pytest.raises(InvalidPresentation):
        GroupElement(np.eye(2), (0, 0, 1))


def test_reflection_fails_codimension_two():
    G = close_group([GroupElement(np.array([[1.0, 0.0], [0.0, -1.0]]))])
    report = validate_codimension2(G)
    assert not report.passed
    assert report.offenders == ((1, 1),)


def test_rotations_pass_codimension_two():
    assert validate_codimension2(cyclic(5)).passed
    assert validate_codimension2(trivial_group(2)).passed


def test_fixed_space_dim():
    assert fixed_space_dim(np.eye(3)) == 3
    assert fixed_space_dim(rotation_matrix(Fraction(1, 4))) == 0
    assert fixed_space_dim(np.diag([1.0, 1.0, -1.0])) == 2


def test_isotropy_of_points():
    G = cyclic(3)
    assert G.isotropy_order([0.0, 0.0]) == 3
    assert G.isotropy_order([0.3, 0.1]) == 1


def test_subgroup_keeps_table():
    G = dihedral(4)
    C = centralizer(G, 0)
    assert C.order == G.order
    rot = [a for a in range(G.order) if np.linalg.det(G.matrix(a)) > 0]
    H = G.subgroup(rot)
    assert H.order == 4 and H.is_abelian()
    with pytest.raises(InvalidPresentation):
        G.subgroup([1, 2])
