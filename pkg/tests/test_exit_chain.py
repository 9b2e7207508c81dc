from fractions import Fraction

import numpy as np
import pytest

from oracles import chain_terms_circles, chain_terms_interval, lhs_disk
from orbifold_index.errors import FieldVanishesOnBoundary, NotGeneric
from orbifold_index.euler_satake import chi_orb_relative
from orbifold_index.exit_chain import compute_chain, normal_component, verify_generic_contact
from orbifold_index.geometry import Domain
from orbifold_index.scenario import catalog_names, interval, load_scenario
from orbifold_index.simplicial import trivial_presentation
from orbifold_index.vector_field import FieldExpr, orbifold_index_sum


def as_callable(F):
    return lambda x, y: tuple(F([x, y]))


@pytest.mark.parametrize("name", [n for n in catalog_names() if n != "interval_outflow"])
def test_catalog_chain_matches_cell_count_oracle(name):
    s = load_scenario(name)
    chain = compute_chain(s.field, s.presentation, s.domain)
    circles = [(c.radius, c.side) for c in s.domain.curves]
    assert chain.chi_terms == chain_terms_circles(as_callable(s.field), circles, s.order)
    for lvl in chain.levels:
        assert lvl.chi_term == lvl.chi_term_downstairs


def test_interval_chain():
    P = trivial_presentation(interval())
    F = FieldExpr.parse(["1"])
    chain = compute_chain(F, P)
    assert chain.chi_terms == chain_terms_interval(lambda x: 1.0) == [Fraction(1)]
    assert chain_terms_interval(lambda x: -1.0) == compute_chain(FieldExpr.parse(["-1"]), P).chi_terms
    assert compute_chain(FieldExpr.parse(["x - 1/2"]), P).chi_terms == [Fraction(2)]


def test_saddle_chain(z2, trivial, unit_domain):
    F = FieldExpr.parse(["x", "-y"])
    up = compute_chain(F, trivial, unit_domain)
    assert [len(lvl.region) for lvl in up.levels] == [2, 0]
    assert len(up.levels[0].gamma) == 4
    assert up.chi_terms == [Fraction(-2), Fraction(0)]
    down = compute_chain(F, z2, unit_domain)
    assert down.chi_terms == [Fraction(-1), Fraction(0)]
    assert down.levels[0].region_orbits == 1 and down.levels[0].gamma_orbits == 2


def test_second_level_exit_set(trivial, unit_domain):
    # a centre pushed sideways: one tangency point lets the field leave R_-^1
    F = FieldExpr.parse(["1/2 - y", "x"])
    chain = compute_chain(F, trivial, unit_domain)
    assert chain.chi_terms == [Fraction(-1), Fraction(1)]
    assert chain.chi_terms == chain_terms_circles(as_callable(F), [(1.0, 1)], 1)
    assert len(chain.levels[1].region) == 1
    lhs = orbifold_index_sum(F, trivial, unit_domain).total
    assert lhs == lhs_disk(as_callable(F), 1) == chi_orb_relative(trivial) + chain.total


def test_normal_component(unit_domain):
    F = FieldExpr.parse(["x", "-y"])
    assert normal_component(F, unit_domain, (0, 0.0)) == pytest.approx(1.0)
    assert normal_component(F, unit_domain, (0, np.pi / 2)) == pytest.approx(-1.0)


def test_rotational_field_rejected(trivial, unit_domain):
    report = verify_generic_contact(FieldExpr.parse(["-y", "x"]), trivial, unit_domain)
    assert not report.passed
    with pytest.raises(NotGeneric):
        compute_chain(FieldExpr.parse(["-y", "x"]), trivial, unit_domain)


def test_touching_normal_component_rejected(trivial, unit_domain):
    # normal component 1 + cos(t) has a double root at t = pi
    F = FieldExpr.parse(["(x + 1)*x - y", "(x + 1)*y + x"])
    report = verify_generic_contact(F, trivial, unit_domain)
    assert not report.passed
    assert any("touches" in str(f) for f in report.failures)


def test_field_vanishing_on_boundary(trivial, unit_domain):
    with pytest.raises(FieldVanishesOnBoundary):
        compute_chain(FieldExpr.parse(["x - 1", "y"]), trivial, unit_domain)


def test_generic_field_accepted(trivial, unit_domain):
    assert verify_generic_contact(FieldExpr.parse(["0", "1"]), trivial, unit_domain).passed


def test_pl_boundary_chain(trivial):
    dom = Domain.from_complex(trivial.complex)
    # constant fields change normal sign only at corners of the hexagon
    with pytest.raises(NotGeneric, match="corner"):
        compute_chain(FieldExpr.parse(["0", "1"]), trivial, dom)
    F = FieldExpr.parse(["x", "-2*y"])
    chain = compute_chain(F, trivial, dom)
    assert chain.chi_terms == [Fraction(-2), Fraction(0)]
    lhs = orbifold_index_sum(F, trivial, dom).total
    assert lhs == chi_orb_relative(trivial) + chain.total == -1
