import math
from fractions import Fraction

import numpy as np
import pytest
import sympy
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from orbifold_index.errors import EvalError, ParseError
from orbifold_index.expr import Const, compile_exprs, evaluate_scalar, parse

X, Y = sympy.symbols("x y")


def expressions(depth: int = 3):
    leaves = st.sampled_from(["x", "y", "1", "2", "3", "0.5", "x1", "x2"])
    if depth == 0:
        return leaves

    sub = expressions(depth - 1)
    return st.one_of(
        leaves,
        st.builds(lambda a, b: f"({a} + {b})", sub, sub),
        st.builds(lambda a, b: f"({a} - {b})", sub, sub),
        st.builds(lambda a, b: f"({a} * {b})", sub, sub),
        st.builds(lambda a, k: f"({a})^{k}", sub, st.integers(0, 3)),
        st.builds(lambda a: f"-({a})", sub),
    )


def to_sympy(text: str):
    return sympy.sympify(text.replace("^", "**").replace("x1", "x").replace("x2", "y"), locals={"x": X, "y": Y})


@settings(max_examples=80, deadline=None)
@given(expressions(), st.floats(-2, 2), st.floats(-2, 2))
def test_value_and_gradient_match_sympy(text, a, b):
    e = parse(text, 2)
    ref = to_sympy(text)
    fn = compile_exprs([e, e.diff(0), e.diff(1)])
    got = evaluate_scalar(fn, [a, b])
    want = [float(ref.subs({X: a, Y: b})), float(sympy.diff(ref, X).subs({X: a, Y: b})),
            float(sympy.diff(ref, Y).subs({X: a, Y: b}))]
    for g, w in zip(got, want):
        assert math.isclose(g, w, rel_tol=1e-9, abs_tol=1e-9)


@settings(max_examples=40, deadline=None)
@given(expressions(2), expressions(2), st.floats(-2, 2), st.floats(-2, 2))
def test_quotient_rule(num, den, a, b):
    ref = to_sympy(f"({num})/({den})")
    d = ref.subs({X: a, Y: b})
    assume(d.is_finite and abs(float(to_sympy(den).subs({X: a, Y: b}))) > 1e-3)
    e = parse(f"({num})/({den})", 2)
    got = evaluate_scalar(compile_exprs([e.diff(0)]), [a, b])[0]
    want = float(sympy.diff(ref, X).subs({X: a, Y: b}))
    assert math.isclose(got, want, rel_tol=1e-7, abs_tol=1e-7)


def test_precedence_and_unary_minus():
    assert evaluate_scalar(compile_exprs([parse("-x^2", 1)]), [3.0])[0] == -9.0
    assert evaluate_scalar(compile_exprs([parse("2*3+4", 1)]), [0.0])[0] == 10.0
    assert evaluate_scalar(compile_exprs([parse("2^-1", 1)]), [0.0])[0] == 0.5


def test_exact_constants_fold():
    assert parse("1/3 + 1/6") == Const(Fraction(1, 2))
    assert parse("0.25") == Const(Fraction(1, 4))
    assert parse("2.5e-3") == Const(Fraction(1, 400))


def test_vectorized_evaluation():
    fn = compile_exprs([parse("x*y", 2)])
    pts = np.array([[1.0, 2.0], [3.0, 4.0]]).T
    assert np.allclose(fn(pts)[0], [2.0, 12.0])


@pytest.mark.parametrize("bad", ["", "x +", "(x", "x ** 2", "sin(x)", "x^y", "x^0.5", "x3", "2 $ 3", "x)"])
def test_parse_errors(bad):
    with pytest.raises(ParseError):
        parse(bad, 2)


def test_division_by_zero():
    with pytest.raises(EvalError):
        parse("1/0")
    with pytest.raises(EvalError):
        evaluate_scalar(compile_exprs([parse("1/x", 1)]), [0.0])
