"""Quadrature rules against closed-form antiderivatives and scipy.

scipy appears here only as an independent oracle; the library itself
never imports it.
"""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import special

from nonholo.quad import (
    adaptive_simpson,
    gauss_legendre_panels,
    incomplete_elliptic_f,
    integrate_smooth,
    periodic_trapezoid,
)


def test_gauss_legendre_exact_on_degree_nine():
    # 5-point Gauss-Legendre integrates degree <= 9 exactly per panel
    coeffs = [0.3, -1.2, 0.0, 2.5, -0.7, 1.1, 0.0, -0.4, 0.9, 0.2]

    def g(t):
        return sum(c * t**k for k, c in enumerate(coeffs))

    exact = sum(
        c / (k + 1) * (2.0 ** (k + 1) - (-1.0) ** (k + 1)) for k, c in enumerate(coeffs)
    )
    assert gauss_legendre_panels(g, -1.0, 2.0, 1) == pytest.approx(exact, rel=1e-14)


def test_gauss_legendre_not_exact_on_degree_ten():
    g = lambda t: t**10
    exact = 2.0 / 11.0
    err = abs(gauss_legendre_panels(g, -1.0, 1.0, 1) - exact)
    assert err > 1e-9


def test_integrate_smooth_transcendental():
    val = integrate_smooth(lambda t: np.exp(-t) * np.sin(3 * t), 0.0, 2.0)
    # antiderivative of e^{-t} sin(3t) is -e^{-t}(sin 3t + 3 cos 3t)/10
    f = lambda t: -math.exp(-t) * (math.sin(3 * t) + 3 * math.cos(3 * t)) / 10.0
    assert val == pytest.approx(f(2.0) - f(0.0), abs=1e-12)
    assert integrate_smooth(lambda t: t, 1.0, 1.0) == 0.0


def test_periodic_trapezoid_trig_polynomial():
    # exact mean of a trig polynomial is its constant coefficient
    g = lambda s: 1.5 + np.cos(2 * np.pi * s) + 0.25 * np.sin(6 * np.pi * s)
    assert periodic_trapezoid(g) == pytest.approx(1.5, abs=1e-13)
    g2 = lambda s: np.sin(2 * np.pi * s) ** 2
    assert periodic_trapezoid(g2) == pytest.approx(0.5, abs=1e-13)


def test_periodic_trapezoid_scaled_period():
    g = lambda s: np.cos(s) ** 2
    assert periodic_trapezoid(g, period=2 * math.pi) == pytest.approx(math.pi, abs=1e-12)


def test_adaptive_simpson_kink():
    # |t| has a kink at 0; adaptivity must localize it
    val = adaptive_simpson(lambda t: abs(t), -1.0, 2.0, tol=1e-12)
    assert val == pytest.approx(2.5, abs=1e-10)


def test_elliptic_frozen_complete_value():
    # K(m = 1/2), independently computed via the arithmetic-geometric mean
    assert incomplete_elliptic_f(math.pi / 2, 0.5) == pytest.approx(
        1.8540746773013719, abs=1e-13
    )


def test_elliptic_matches_scipy_grid():
    for phi in (-1.2, -0.3, 0.0, 0.4, 1.0, math.pi / 2, 2.5, 4.0):
        for m in (0.0, 0.1, 0.5, 0.9):
            mine = incomplete_elliptic_f(phi, m)
            ref = special.ellipkinc(phi, m)
            assert mine == pytest.approx(ref, rel=1e-12, abs=1e-12)


def test_elliptic_degenerate_parameter_is_identity():
    for phi in (-0.8, 0.0, 1.3):
        assert incomplete_elliptic_f(phi, 0.0) == pytest.approx(phi, abs=1e-13)


@settings(max_examples=30, deadline=None)
@given(
    st.floats(-3.0, 3.0, allow_nan=False),
    st.floats(0.0, 0.95, allow_nan=False),
)
def test_elliptic_odd_in_amplitude(phi, m):
    assert incomplete_elliptic_f(-phi, m) == pytest.approx(
        -incomplete_elliptic_f(phi, m), abs=1e-12
    )


@settings(max_examples=30, deadline=None)
@given(
    st.lists(st.floats(-2, 2, allow_nan=False), min_size=1, max_size=6),
    st.floats(-1.5, 0.5, allow_nan=False),
    st.floats(0.6, 2.0, allow_nan=False),
)
def test_integrate_smooth_polynomial_antiderivative(coeffs, a, width):
    b = a + width

    def g(t):
        return sum(c * t**k for k, c in enumerate(coeffs))

    exact = sum(c / (k + 1) * (b ** (k + 1) - a ** (k + 1)) for k, c in enumerate(coeffs))
    assert integrate_smooth(g, a, b) == pytest.approx(exact, rel=1e-9, abs=1e-9)
