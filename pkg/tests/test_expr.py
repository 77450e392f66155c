"""Expression layer: parsing, evaluation, exact derivatives, certificates.

Derivatives are checked against central finite differences; the symbolic
zero test is checked on identities that cancel only after expansion.
"""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nonholo import expr as ex
from nonholo.expr import (
    Const,
    ParseError,
    Var,
    compile_expr,
    diff,
    evaluate,
    is_zero_polynomial,
    parse,
    polynomial,
    substitute,
)

POINTS = [
    (0.3, -0.7, 1.1),
    (1.0, 2.0, -0.5),
    (-1.4, 0.2, 0.9),
    (0.0, 1.0, 2.0),
]


def test_parse_matches_math():
    cases = {
        "x1^2 + 2*x2": lambda p: p[0] ** 2 + 2 * p[1],
        "sin(x1)*cos(x2) - exp(x3/2)": lambda p: math.sin(p[0]) * math.cos(p[1])
        - math.exp(p[2] / 2),
        "-x1^3 / (1 + x2^2)": lambda p: -(p[0] ** 3) / (1 + p[1] ** 2),
        "2.5e-1 * x1 - 3": lambda p: 0.25 * p[0] - 3,
        "(x1 + x2)^4": lambda p: (p[0] + p[1]) ** 4,
    }
    for text, fn in cases.items():
        e = parse(text)
        for p in POINTS:
            assert evaluate(e, p) == pytest.approx(fn(p), rel=1e-14)


def test_parse_error_positions():
    with pytest.raises(ParseError) as err:
        parse("x1 +")
    assert err.value.position == 4
    with pytest.raises(ParseError) as err:
        parse("y1 + 2")
    assert err.value.position == 0
    with pytest.raises(ParseError) as err:
        parse("x1^2.5")
    assert err.value.position == 3
    assert "integer" in str(err.value)


def test_parse_rejects_garbage():
    for text in ("", "()", "x4", "sin x1", "1 + * 2", "x1^"):
        with pytest.raises(ParseError):
            parse(text)


def test_power_requires_int():
    with pytest.raises(TypeError):
        ex.power(ex.X1, 2.0)


def test_negative_power_evaluates():
    e = parse("x1^-2")
    assert evaluate(e, (2.0, 0.0)) == pytest.approx(0.25)
    arr = evaluate(e, (np.array([1.0, 2.0, 4.0]), np.zeros(3)))
    np.testing.assert_allclose(arr, [1.0, 0.25, 0.0625])


def _central_diff(e, p, i, h=1e-6):
    lo = list(p)
    hi = list(p)
    lo[i - 1] -= h
    hi[i - 1] += h
    return (evaluate(e, hi) - evaluate(e, lo)) / (2 * h)


def test_diff_against_finite_differences():
    exprs = [
        "x1^2*x2 + sin(x1)",
        "exp(x1*x2) - x3^3",
        "cos(x1^2) / (2 + x2^2)",
        "x1*x2*x3 + x2^4",
        "sin(cos(x1) + x2)",
    ]
    for text in exprs:
        e = parse(text)
        for i in (1, 2, 3):
            d = diff(e, i)
            for p in POINTS:
                assert evaluate(d, p) == pytest.approx(
                    _central_diff(e, p, i), rel=2e-8, abs=2e-8
                )


def test_diff_constants_and_vars():
    assert evaluate(diff(Const(5.0), 1), (1.0,)) == 0.0
    assert evaluate(diff(Var(2), 2), (0.0, 0.0)) == 1.0
    assert evaluate(diff(Var(2), 1), (0.0, 0.0)) == 0.0


def test_substitute():
    e = parse("x1^2 + x2")
    swapped = substitute(e, {1: ex.X2, 2: ex.X1})
    for p in POINTS:
        assert evaluate(swapped, p) == pytest.approx(p[1] ** 2 + p[0])


def test_polynomial_extraction():
    e = parse("3*x1^2*x2 - x2 + 4")
    terms = polynomial(e)
    assert terms == {
        (2, 1, 0): pytest.approx(3.0),
        (0, 1, 0): pytest.approx(-1.0),
        (0, 0, 0): pytest.approx(4.0),
    }
    assert polynomial(parse("sin(x1)")) is None


def test_is_zero_polynomial_certificates():
    # cancels only after full expansion
    e = parse("(x1 + x2)^2 - x1^2 - 2*x1*x2 - x2^2")
    assert is_zero_polynomial(e)
    assert not is_zero_polynomial(parse("(x1 + x2)^2 - x1^2 - x2^2"))
    # non-polynomial structural zero still certifies
    s = parse("sin(x1)")
    assert is_zero_polynomial(ex.sub(s, s))


def test_smart_constructor_folding():
    assert ex.add(Const(2.0), Const(3.0)) == Const(5.0)
    assert ex.mul(ex.ZERO, ex.X1) == ex.ZERO
    assert ex.mul(ex.ONE, ex.X1) == ex.X1
    assert ex.neg(ex.neg(ex.X2)) == ex.X2
    assert ex.power(ex.X1, 1) == ex.X1
    assert ex.power(Const(0.0), -1) != Const(float("inf"))  # fold is guarded


@st.composite
def poly_exprs(draw):
    coeffs = draw(
        st.lists(
            st.floats(-3, 3, allow_nan=False, allow_infinity=False),
            min_size=1,
            max_size=5,
        )
    )
    e = Const(coeffs[0])
    for k, c in enumerate(coeffs[1:], start=1):
        term = ex.mul(Const(c), ex.power(ex.X1 if k % 2 else ex.X2, 1 + k % 3))
        e = ex.add(e, term)
    return e


@settings(max_examples=40, deadline=None)
@given(poly_exprs(), st.floats(-2, 2, allow_nan=False), st.floats(-2, 2, allow_nan=False))
def test_compile_matches_evaluate(e, a, b):
    f = compile_expr(e)
    assert f((a, b)) == pytest.approx(evaluate(e, (a, b)), rel=1e-12, abs=1e-12)


@settings(max_examples=40, deadline=None)
@given(poly_exprs())
def test_diff_of_poly_is_poly(e):
    d = diff(e, 1)
    terms = polynomial(d)
    assert terms is not None
    # derivative of the extracted polynomial matches term-by-term
    src = polynomial(e)
    want = {}
    for (d1, d2, d3), c in src.items():
        if d1 > 0:
            key = (d1 - 1, d2, d3)
            want[key] = want.get(key, 0.0) + c * d1
    for key, c in want.items():
        assert terms.get(key, 0.0) == pytest.approx(c, rel=1e-12, abs=1e-12)
