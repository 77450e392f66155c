"""Vector fields: differential operators vs finite differences, complex
field constructors vs direct complex arithmetic, excluded-set guards."""

import numpy as np
import pytest

from nonholo import expr as ex
from nonholo.expr import parse
from nonholo.fields import (
    GUARD_RADIUS,
    ExcludedSetError,
    VectorField,
    cauchy_riemann_exprs,
    cauchy_riemann_residual,
    conjugate_power,
    curl,
    curl_expr,
    divergence,
    gradient_field,
    holomorphic_power,
    is_symbolically_zero,
    reciprocal_pole,
    signed_flip,
)

PTS2 = [(0.4, -0.9), (1.3, 0.7), (-0.6, -0.2)]
PTS3 = [(0.4, -0.9, 1.2), (1.3, 0.7, -0.5)]


def field2(f1, f2, **kw):
    return VectorField((parse(f1), parse(f2)), **kw)


def _fd_partial(fn, p, i, h=1e-6):
    lo, hi = list(p), list(p)
    lo[i] -= h
    hi[i] += h
    return (fn(hi) - fn(lo)) / (2 * h)


def test_planar_curl_vs_finite_differences():
    f = field2("x1^2*x2 + sin(x2)", "exp(x1) - x2^3")
    for p in PTS2:
        want = _fd_partial(lambda q: f(q)[1], p, 0) - _fd_partial(
            lambda q: f(q)[0], p, 1
        )
        assert curl(f, p) == pytest.approx(want, rel=1e-7, abs=1e-7)


def test_spatial_curl_vs_finite_differences():
    f = VectorField((parse("x2*x3"), parse("x1^2 - x3"), parse("sin(x1*x2)")))
    for p in PTS3:
        c = curl(f, p)
        want = (
            _fd_partial(lambda q: f(q)[2], p, 1) - _fd_partial(lambda q: f(q)[1], p, 2),
            _fd_partial(lambda q: f(q)[0], p, 2) - _fd_partial(lambda q: f(q)[2], p, 0),
            _fd_partial(lambda q: f(q)[1], p, 0) - _fd_partial(lambda q: f(q)[0], p, 1),
        )
        assert c == pytest.approx(want, rel=1e-6, abs=1e-6)


def test_divergence_vs_finite_differences():
    f = field2("x1^3 - x2", "x1*x2^2")
    for p in PTS2:
        want = _fd_partial(lambda q: f(q)[0], p, 0) + _fd_partial(
            lambda q: f(q)[1], p, 1
        )
        assert divergence(f, p) == pytest.approx(want, rel=1e-7, abs=1e-7)


def test_classic_pair_has_constant_curl_two():
    f = field2("-x2", "x1")
    for p in PTS2:
        assert curl(f, p) == pytest.approx(2.0)


def test_gradient_field_is_curl_free():
    for text in ("x1^2 + x1*x2^3", "sin(x1)*cos(x2)", "exp(x1 - x2)"):
        g = gradient_field(parse(text))
        for p in PTS2:
            assert curl(g, p) == pytest.approx(0.0, abs=1e-12)
    # polynomial potentials certify symbolically as well
    g = gradient_field(parse("x1^2*x2 - x2^4"))
    assert is_symbolically_zero(curl_expr(g))


def test_gradient_field_components():
    g = gradient_field(parse("x1^2*x2"))
    p = (1.5, -0.5)
    assert g(p)[0] == pytest.approx(2 * 1.5 * -0.5)
    assert g(p)[1] == pytest.approx(1.5**2)


def test_signed_flip():
    f = field2("x1 + x2", "x1*x2")
    g = signed_flip(f, (-1, 1))
    for p in PTS2:
        assert g(p)[0] == pytest.approx(-f(p)[0])
        assert g(p)[1] == pytest.approx(f(p)[1])


def test_cauchy_riemann_identity_field():
    # F = z: components (x1, x2) satisfy the equations everywhere
    F = (ex.X1, ex.X2)
    for p in PTS2:
        assert cauchy_riemann_residual(F, p) == pytest.approx((0.0, 0.0))


def test_cauchy_riemann_swapped_pair():
    # the pair (x2, x1) taken as Re, Im fails with residual (0, 2)
    F = (ex.X2, ex.X1)
    for p in PTS2:
        assert cauchy_riemann_residual(F, p) == pytest.approx((0.0, 2.0))


def test_cauchy_riemann_conjugate():
    # conj(z) = (x1, -x2): first residual is 2, second 0
    F = (ex.X1, ex.neg(ex.X2))
    for p in PTS2:
        assert cauchy_riemann_residual(F, p) == pytest.approx((2.0, 0.0))


def test_cauchy_riemann_exprs_certify_powers():
    for n in range(5):
        r1, r2 = cauchy_riemann_exprs(*holomorphic_power(n))
        assert is_symbolically_zero(r1)
        assert is_symbolically_zero(r2)
    r1, r2 = cauchy_riemann_exprs(*conjugate_power(2))
    assert not (is_symbolically_zero(r1) and is_symbolically_zero(r2))


def test_holomorphic_power_matches_complex_arithmetic():
    for n in range(6):
        re, im = holomorphic_power(n)
        for p in PTS2:
            z = complex(*p) ** n
            assert ex.evaluate(re, p) == pytest.approx(z.real, rel=1e-12, abs=1e-12)
            assert ex.evaluate(im, p) == pytest.approx(z.imag, rel=1e-12, abs=1e-12)


def test_conjugate_power_matches_complex_arithmetic():
    for n in range(6):
        re, im = conjugate_power(n)
        for p in PTS2:
            z = complex(p[0], -p[1]) ** n
            assert ex.evaluate(re, p) == pytest.approx(z.real, rel=1e-12, abs=1e-12)
            assert ex.evaluate(im, p) == pytest.approx(z.imag, rel=1e-12, abs=1e-12)


def test_reciprocal_pole_matches_complex_arithmetic():
    a = complex(0.5, -1.0)
    re, im = reciprocal_pole(a)
    for p in PTS2:
        w = 1.0 / (complex(*p) - a)
        assert ex.evaluate(re, p) == pytest.approx(w.real, rel=1e-12)
        assert ex.evaluate(im, p) == pytest.approx(w.imag, rel=1e-12)


def test_guard_radius_enforced():
    f = field2("x1 / (x1^2 + x2^2)", "x2 / (x1^2 + x2^2)", excluded=((0.0, 0.0),))
    with pytest.raises(ExcludedSetError):
        f((0.0, 0.0))
    with pytest.raises(ExcludedSetError):
        f((GUARD_RADIUS / 2, 0.0))
    assert f((1.0, 0.0)) == pytest.approx((1.0, 0.0))
    # array evaluation trips the guard if any sample is too close
    with pytest.raises(ExcludedSetError):
        f((np.array([1.0, 1e-12]), np.array([0.0, 0.0])))


def test_guard_applies_to_operators():
    f = field2("-x2/(x1^2+x2^2)", "x1/(x1^2+x2^2)", excluded=((0.0, 0.0),))
    with pytest.raises(ExcludedSetError):
        curl(f, (0.0, 0.0))
    with pytest.raises(ExcludedSetError):
        divergence(f, (0.0, 0.0))


def test_field_validation():
    with pytest.raises(ValueError, match="2 or 3"):
        VectorField((ex.X1,))
    with pytest.raises(ValueError, match="dimension"):
        VectorField((ex.X1, ex.X2), excluded=((0.0, 0.0, 0.0),))


def test_vortex_curl_vanishes_off_center():
    f = field2("-x2/(x1^2+x2^2)", "x1/(x1^2+x2^2)", excluded=((0.0, 0.0),))
    for p in ((1.0, 0.5), (-0.3, 0.8), (2.0, -1.0)):
        assert curl(f, p) == pytest.approx(0.0, abs=1e-12)
