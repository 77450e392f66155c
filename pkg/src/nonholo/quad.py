"""Quadrature primitives shared across the package.

Three rules, each chosen for its error behaviour rather than generality:

- composite 5-point Gauss-Legendre with panel doubling, for smooth
  integrands on an interval (fiber displacement, signal energy);
- the periodic trapezoid rule with point doubling, spectrally accurate on
  smooth closed-loop integrands (line and contour integrals);
- adaptive Simpson, for integrands whose difficulty is localized
  (incomplete elliptic integrals).

All of these are deliberately independent of the ODE integrator so that
agreement between the two is a real check and not a tautology.
"""

from __future__ import annotations

import math
from typing import Callable

import numpy as np

__all__ = [
    "gauss_legendre_panels",
    "integrate_smooth",
    "periodic_trapezoid",
    "adaptive_simpson",
    "incomplete_elliptic_f",
]

# 5-point Gauss-Legendre nodes and weights on [-1, 1].
_GL_NODES = np.array(
    [
        -0.9061798459386639928,
        -0.5384693101056830910,
        0.0,
        0.5384693101056830910,
        0.9061798459386639928,
    ]
)
_GL_WEIGHTS = np.array(
    [
        0.2369268850561890875,
        0.4786286704993664680,
        0.5688888888888888889,
        0.4786286704993664680,
        0.2369268850561890875,
    ]
)


def gauss_legendre_panels(g: Callable[[np.ndarray], np.ndarray], a: float, b: float, panels: int) -> float:
    """Composite 5-point Gauss-Legendre with ``panels`` equal panels.

    ``g`` must accept a numpy array of abscissae and return values of the
    same shape.
    """
    edges = np.linspace(a, b, panels + 1)
    half = 0.5 * (edges[1:] - edges[:-1])
    mid = 0.5 * (edges[1:] + edges[:-1])
    # nodes: shape (panels, 5)
    ts = mid[:, None] + half[:, None] * _GL_NODES[None, :]
    vals = g(ts.reshape(-1)).reshape(panels, 5)
    return float(np.sum(half * (vals @ _GL_WEIGHTS)))


def integrate_smooth(
    g: Callable[[np.ndarray], np.ndarray],
    a: float,
    b: float,
    rtol: float = 1e-10,
    atol: float = 1e-12,
    start_panels: int = 8,
    max_panels: int = 1 << 14,
) -> float:
    """Panel-doubled Gauss-Legendre until two refinements agree."""
    if b == a:
        return 0.0
    panels = start_panels
    prev = gauss_legendre_panels(g, a, b, panels)
    while panels < max_panels:
        panels *= 2
        cur = gauss_legendre_panels(g, a, b, panels)
        if abs(cur - prev) <= max(atol, rtol * abs(cur)):
            return cur
        prev = cur
    return prev


def periodic_trapezoid(
    g: Callable[[np.ndarray], np.ndarray],
    period: float = 1.0,
    min_points: int = 256,
    max_points: int = 1 << 16,
    tol: float = 1e-10,
) -> float:
    """Trapezoid rule on one period of ``g``, doubling until |delta| < tol.

    For smooth periodic integrands this converges faster than any power of
    the step, so the doubling test is a faithful error estimate.
    """
    n = min_points
    s = np.linspace(0.0, period, n, endpoint=False)
    prev = float(np.mean(g(s))) * period
    while n < max_points:
        n *= 2
        s = np.linspace(0.0, period, n, endpoint=False)
        cur = float(np.mean(g(s))) * period
        if abs(cur - prev) < tol:
            return cur
        prev = cur
    return prev


def adaptive_simpson(
    g: Callable[[float], float],
    a: float,
    b: float,
    tol: float = 1e-10,
    max_depth: int = 40,
) -> float:
    """Classic recursive Simpson with the 1/15 error estimate."""
    fa, fb = g(a), g(b)
    m = 0.5 * (a + b)
    fm = g(m)
    whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    return _simpson_rec(g, a, b, fa, fm, fb, whole, tol, max_depth)


def _simpson_rec(g, a, b, fa, fm, fb, whole, tol, depth):
    m = 0.5 * (a + b)
    lm, rm = 0.5 * (a + m), 0.5 * (m + b)
    flm, frm = g(lm), g(rm)
    left = (m - a) / 6.0 * (fa + 4.0 * flm + fm)
    right = (b - m) / 6.0 * (fm + 4.0 * frm + fb)
    if depth <= 0 or abs(left + right - whole) <= 15.0 * tol:
        return left + right + (left + right - whole) / 15.0
    return _simpson_rec(g, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) + _simpson_rec(
        g, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1
    )


def incomplete_elliptic_f(phi: float, m: float) -> float:
    """The incomplete elliptic integral F(phi | m) with parameter m.

    Integrates (1 - m sin^2 t)^{-1/2} from 0 to phi.  The integrand is
    smooth and positive for 0 <= m < 1, so the analytic continuation to
    any real amplitude is the integral itself; oddness in phi is applied
    explicitly to keep the recursion on a forward interval.
    """
    if not 0.0 <= m < 1.0:
        raise ValueError(f"parameter must lie in [0, 1), got {m}")
    if phi == 0.0:
        return 0.0
    if phi < 0.0:
        return -incomplete_elliptic_f(-phi, m)

    def g(t: float) -> float:
        s = math.sin(t)
        return 1.0 / math.sqrt(1.0 - m * s * s)

    return adaptive_simpson(g, 0.0, phi, tol=1e-13)
