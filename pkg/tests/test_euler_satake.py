from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import euler_char, relative_chi
from orbifold_index.errors import MismatchDetected
from orbifold_index.euler_satake import (
    chi_orb,
    chi_orb_direct,
    chi_orb_oracle,
    chi_orb_relative,
    chi_underlying,
)
from orbifold_index.simplicial import boundary_presentation, double_complex, subdivide_presentation
from test_simplicial import rotation_presentation


def test_disk_values(trivial, z3, z2):
    assert chi_orb(trivial) == 1
    assert chi_orb(z3) == Fraction(1, 3)
    assert chi_orb(z2) == Fraction(1, 2)
    assert chi_orb(boundary_presentation(z3)) == 0
    assert chi_orb_relative(z3) == Fraction(1, 3)
    assert chi_orb_relative(z2) == Fraction(1, 2)


def test_underlying_space(z3, z2):
    # a disk modulo a rotation is again a disk
    assert chi_underlying(z3) == 1
    assert chi_underlying(z2) == 1
    assert chi_underlying(boundary_presentation(z3)) == 0


def test_sphere_double(z3):
    assert chi_orb(double_complex(z3)) == Fraction(2, 3)


@settings(max_examples=15, deadline=None)
@given(st.sampled_from([(3, 3), (4, 2), (4, 4), (6, 2), (6, 3), (6, 6), (8, 4), (10, 5), (12, 4)]))
def test_direct_sum_matches_face_count_oracle(nk):
    n, k = nk
    P = rotation_presentation(n, k)
    tops = P.complex.top
    assert chi_orb_direct(P) == Fraction(euler_char(tops), k) == Fraction(1, k)
    assert chi_orb_relative(P) == relative_chi(tops, k)


@settings(max_examples=6, deadline=None)
@given(st.sampled_from([(4, 2), (6, 3), (6, 6)]))
def test_invariant_under_subdivision(nk):
    P = rotation_presentation(*nk)
    values = {chi_orb(P)}
    for _ in range(2):
        P = subdivide_presentation(P)
        values.add(chi_orb(P))
        values.add(chi_orb_oracle(P))
    assert len(values) == 1


@settings(max_examples=8, deadline=None)
@given(st.sampled_from([(4, 2), (6, 3), (6, 6), (8, 8)]))
def test_additivity_on_double(nk):
    P = rotation_presentation(*nk)
    assert chi_orb(double_complex(P)) == 2 * chi_orb(P) - chi_orb(boundary_presentation(P))


def test_mismatch_is_reported(z3, monkeypatch):
    import orbifold_index.euler_satake as es

    monkeypatch.setattr(es, "chi_orb_oracle", lambda P: Fraction(7))
    with pytest.raises(MismatchDetected):
        es.chi_orb(z3)
