from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from orbifold_index.doubling import (
    CollarChart,
    build_doubled_field,
    bump,
    collar_zero_scan,
    verify_double_index,
)
from orbifold_index.errors import BoundaryZeroDegenerate, SupportTooWide, UnsupportedDimension
from orbifold_index.euler_satake import chi_orb
from orbifold_index.geometry import Domain
from orbifold_index.scenario import interval, load_scenario
from orbifold_index.simplicial import double_complex, trivial_presentation
from orbifold_index.vector_field import FieldExpr

SADDLE = FieldExpr.parse(["x", "-y"])


@settings(max_examples=60, deadline=None)
@given(st.floats(-3, 3), st.floats(0.01, 1.0))
def test_bump_shape(v, s):
    phi = float(bump(v, s))
    assert 0.0 <= phi <= 1.0
    if abs(v) <= s / 2:
        assert phi == 1.0
    if abs(v) >= s:
        assert phi == 0.0
    assert float(bump(-v, s)) == phi


def test_bump_is_c1():
    s = 0.4
    h = 1e-6
    for knot in (s / 2, s):
        left = (bump(knot, s) - bump(knot - h, s)) / h
        right = (bump(knot + h, s) - bump(knot, s)) / h
        assert abs(left) < 1e-4 and abs(right) < 1e-4


def test_collar_chart_invariant():
    CollarChart(0.25, 0.1)
    with pytest.raises(SupportTooWide):
        CollarChart(0.25, 0.25)
    with pytest.raises(SupportTooWide):
        CollarChart(0.25, 0.0)


def test_saddle_on_disk(trivial, unit_domain):
    D = build_doubled_field(SADDLE, trivial, unit_domain)
    params = [z.param for z in D.boundary_zeros]
    assert np.allclose(params, [0, np.pi / 2, np.pi, 3 * np.pi / 2], atol=1e-9)
    # Z_h = -sin(2t): slope -2cos(2t) gives indices -1, +1, -1, +1
    assert [z.zh_index for z in D.boundary_zeros] == [-1, 1, -1, 1]
    assert [z.region for z in D.boundary_zeros] == ["-", "+", "-", "+"]
    R = verify_double_index(D, trivial)
    assert [z.x_index for z in R.zeros] == [1, 1, 1, 1]
    assert R.boundary_upstairs == 4
    assert R.total == 2 == chi_orb(double_complex(trivial))


def test_saddle_on_disk_mod_antipodal(z2, unit_domain):
    D = build_doubled_field(SADDLE, z2, unit_domain)
    R = verify_double_index(D, z2)
    assert R.interior == Fraction(-1, 2)
    assert R.boundary_upstairs == R.boundary_downstairs == 2
    assert R.total == 1 == 2 * chi_orb(z2) - 0
    assert all(z.jacobian_sign == z.oracle_index == z.x_index for z in R.zeros)


def test_stretched_saddle_accepted(trivial, unit_domain):
    D = build_doubled_field(FieldExpr.parse(["2*x", "-y"]), trivial, unit_domain)
    assert len(D.boundary_zeros) == 4
    assert verify_double_index(D, trivial).total == 2


def test_radial_field_rejected(trivial, unit_domain):
    with pytest.raises(BoundaryZeroDegenerate, match="identically"):
        build_doubled_field(FieldExpr.parse(["x", "y"]), trivial, unit_domain)


def test_bookkeeping_lines(trivial, unit_domain):
    R = verify_double_index(build_doubled_field(SADDLE, trivial, unit_domain), trivial)
    assert R.passed
    assert R.indexstep2 == [R.interior] * 5
    assert R.indexstep2[-1] == (R.chi_q - R.chi_boundary) + R.j_minus
    # the tangential indices over R_+ and R_- add up to chi(dQ)
    assert R.j_plus + R.j_minus == R.chi_boundary == 0
    assert R.j_plus - R.j_minus == 4
    assert R.j_minus == R.chain_total


def test_continuity_and_tangency_on_boundary(trivial, unit_domain):
    D = build_doubled_field(SADDLE, trivial, unit_domain)
    t = np.linspace(0, 2 * np.pi, 97)
    h0, w0 = D.collar_field(0, t, np.zeros_like(t))
    assert np.allclose(w0, 0.0)
    assert np.allclose(h0, -np.sin(2 * t))
    for v in (1e-7, -1e-7):
        h, w = D.collar_field(0, t, np.full_like(t, v))
        assert np.allclose(h, h0, atol=1e-5) and np.allclose(w, w0, atol=1e-5)


def test_matches_base_field_outside_support(trivial, unit_domain):
    D = build_doubled_field(SADDLE, trivial, unit_domain)
    s = D.collar.s
    t = np.linspace(0, 2 * np.pi, 50)
    for v in (1.5 * s, 0.9 * D.collar.epsilon):
        pts = D.domain.curves[0].inward_point(t, np.full_like(t, v))
        h, w = D.collar_field(0, t, np.full_like(t, v))
        c = D.domain.curves[0]
        Y = SADDLE.many(pts)
        assert np.allclose(h, np.einsum("ij,ij->i", Y, c.tangent(t)))
        assert np.allclose(w, -np.einsum("ij,ij->i", Y, c.normal(t)))
    p = np.array([0.1, 0.2])
    assert np.allclose(D.evaluate(0, p), SADDLE(p))
    assert np.allclose(D.evaluate(1, p), SADDLE(p))


def test_equals_field_on_tangency_locus(trivial, unit_domain):
    D = build_doubled_field(SADDLE, trivial, unit_domain)
    c = D.domain.curves[0]
    for t in np.pi / 4 + np.arange(4) * np.pi / 2:
        p = c.point(t)
        assert np.allclose(D.evaluate(0, p), SADDLE(p), atol=1e-12)


def test_no_collar_zeros_off_boundary(trivial, z2, unit_domain):
    for P in (trivial, z2):
        D = build_doubled_field(SADDLE, P, unit_domain)
        assert collar_zero_scan(D) > 1e-3


def test_support_too_wide(trivial, unit_domain):
    # normal part vanishes on r = 0.9 while the tangential part changes sign
    # near r = 0.92, so a bump reaching past depth 0.1 creates a ring of zeros
    g, k = "(81/100 - x^2 - y^2)", "(x^2 + y^2 - 85/100)"
    F = FieldExpr.parse([f"{g}*x - {k}*y", f"{g}*y + {k}*x"])
    with pytest.raises(SupportTooWide, match="safe bound"):
        build_doubled_field(F, trivial, unit_domain, s=0.116, epsilon=0.25)
    D = build_doubled_field(F, trivial, unit_domain, epsilon=0.25)
    assert D.collar.s < 0.06
    R = verify_double_index(D, trivial)
    assert R.total == 2 == R.chi_double


def test_interval_double():
    P = trivial_presentation(interval())
    D = build_doubled_field(FieldExpr.parse(["1"]), P, Domain.from_complex(P.complex))
    R = verify_double_index(D, P)
    assert [z.region for z in R.zeros] == ["+", "-"]
    assert [z.x_index for z in R.zeros] == [1, -1]
    assert R.total == 0 == chi_orb(double_complex(P))


def test_annulus_double_is_torus():
    s = load_scenario("annulus_trivial_rotational")
    D = build_doubled_field(s.field, s.presentation, s.domain)
    assert D.boundary_zeros == []
    R = verify_double_index(D, s.presentation)
    assert R.total == 0 == R.chi_double


@pytest.mark.parametrize("name", ["disk_z3_cubic", "disk_trivial_offcenter"])
def test_catalog_doubles(name):
    s = load_scenario(name)
    D = build_doubled_field(s.field, s.presentation, s.domain)
    R = verify_double_index(D, s.presentation)
    assert R.total == 2 * chi_orb(s.presentation) - R.chi_boundary


def test_pl_boundary_unsupported(trivial):
    with pytest.raises(UnsupportedDimension):
        build_doubled_field(SADDLE, trivial, Domain.from_complex(trivial.complex))
