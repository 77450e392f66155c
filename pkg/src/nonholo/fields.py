"""Vector fields on the plane or 3-space, with the calculus used everywhere else.

Fields are tuples of symbolic components (see :mod:`nonholo.expr`).  Points
are plain sequences of floats; vectorized evaluation accepts numpy arrays
componentwise.  A field may declare an excluded set (isolated points where
it is undefined, e.g. a pole at the origin); evaluation within the guard
radius of an excluded point raises :class:`ExcludedSetError`.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from typing import Sequence

import numpy as np

from . import expr as ex
from .expr import ScalarExpr

__all__ = [
    "GUARD_RADIUS",
    "ExcludedSetError",
    "VectorField",
    "curl_expr",
    "curl",
    "divergence_expr",
    "divergence",
    "gradient_field",
    "signed_flip",
    "cauchy_riemann_residual",
    "cauchy_riemann_exprs",
    "holomorphic_power",
    "conjugate_power",
    "reciprocal_pole",
    "is_symbolically_zero",
]

GUARD_RADIUS = 1e-9


class ExcludedSetError(ValueError):
    """Evaluation requested within the guard radius of an excluded point."""


@dataclass(frozen=True)
class VectorField:
    """A 2- or 3-component field with optional excluded points.

    components : symbolic expressions in x1..x_dim
    excluded   : points (same dimension) where the field is undefined
    note       : free-text description of the excluded set
    """

    components: tuple[ScalarExpr, ...]
    excluded: tuple[tuple[float, ...], ...] = ()
    note: str = ""

    def __post_init__(self) -> None:
        if len(self.components) not in (2, 3):
            raise ValueError("a field has 2 or 3 components")
        object.__setattr__(self, "components", tuple(self.components))
        object.__setattr__(
            self, "excluded", tuple(tuple(float(c) for c in p) for p in self.excluded)
        )
        for p in self.excluded:
            if len(p) != len(self.components):
                raise ValueError("excluded point dimension differs from field dimension")

    @property
    def dim(self) -> int:
        return len(self.components)

    def guard(self, point: Sequence) -> None:
        """Raise if ``point`` (scalars or arrays) lies within the guard radius of an excluded point."""
        if not self.excluded:
            return
        coords = [np.asarray(c, dtype=float) for c in point[: self.dim]]
        for p in self.excluded:
            d2 = sum((c - pc) ** 2 for c, pc in zip(coords, p))
            if np.min(d2) < GUARD_RADIUS**2:
                raise ExcludedSetError(
                    f"evaluation within guard radius of excluded point {p}"
                )

    def __call__(self, point: Sequence):
        self.guard(point)
        return tuple(ex.evaluate(c, point) for c in self.components)


def _planar(f: VectorField) -> None:
    if f.dim != 2:
        raise ValueError("operation requires a 2-component field")


def curl_expr(f: VectorField):
    """Symbolic curl: a scalar for planar fields, a 3-tuple in 3-space."""
    if f.dim == 2:
        f1, f2 = f.components
        return ex.sub(ex.diff(f2, 1), ex.diff(f1, 2))
    f1, f2, f3 = f.components
    return (
        ex.sub(ex.diff(f3, 2), ex.diff(f2, 3)),
        ex.sub(ex.diff(f1, 3), ex.diff(f3, 1)),
        ex.sub(ex.diff(f2, 1), ex.diff(f1, 2)),
    )


def curl(f: VectorField, point: Sequence):
    """Curl at a point: float (planar) or 3-tuple (spatial)."""
    f.guard(point)
    c = curl_expr(f)
    if f.dim == 2:
        return ex.evaluate(c, point)
    return tuple(ex.evaluate(ci, point) for ci in c)


def divergence_expr(f: VectorField) -> ScalarExpr:
    out = ex.ZERO
    for i, c in enumerate(f.components, start=1):
        out = ex.add(out, ex.diff(c, i))
    return out


def divergence(f: VectorField, point: Sequence) -> float:
    f.guard(point)
    return ex.evaluate(divergence_expr(f), point)


def gradient_field(phi: ScalarExpr, dim: int = 2) -> VectorField:
    """The gradient of a potential as a field (curl-free by construction)."""
    if dim not in (2, 3):
        raise ValueError("dim must be 2 or 3")
    return VectorField(tuple(ex.diff(phi, i) for i in range(1, dim + 1)))


def signed_flip(f: VectorField, signs: Sequence[int]) -> VectorField:
    """Apply a diagonal +-1 matrix H to the components: (H f)_i = signs_i * f_i."""
    if len(signs) != f.dim:
        raise ValueError("signs length differs from field dimension")
    if any(s not in (1, -1) for s in signs):
        raise ValueError("signs must be +1 or -1")
    comps = tuple(
        c if s == 1 else ex.neg(c) for c, s in zip(f.components, signs)
    )
    return VectorField(comps, excluded=f.excluded, note=f.note)


def cauchy_riemann_exprs(F1: ScalarExpr, F2: ScalarExpr) -> tuple[ScalarExpr, ScalarExpr]:
    """Symbolic residuals of the Cauchy-Riemann system for F = F1 + i F2.

    Both vanish identically iff F is holomorphic in z = x1 + i x2.
    """
    r1 = ex.sub(ex.diff(F1, 1), ex.diff(F2, 2))
    r2 = ex.add(ex.diff(F2, 1), ex.diff(F1, 2))
    return r1, r2


def cauchy_riemann_residual(F: Sequence[ScalarExpr], point: Sequence) -> tuple[float, float]:
    """(dF1/dx1 - dF2/dx2, dF2/dx1 + dF1/dx2) at ``point``; (0, 0) iff the
    Cauchy-Riemann equations hold there for F = F1 + i F2."""
    F1, F2 = F
    r1, r2 = cauchy_riemann_exprs(F1, F2)
    return ex.evaluate(r1, point), ex.evaluate(r2, point)


def is_symbolically_zero(e: ScalarExpr, tol: float = 1e-10) -> bool:
    """Certificate that ``e`` is identically zero.

    Structural simplification already collapses easy cases; otherwise a
    polynomial normal form decides.  Non-polynomial expressions yield False
    (no certificate), never a wrong True.
    """
    if e == ex.ZERO or (isinstance(e, ex.Const) and e.value == 0.0):
        return True
    return ex.is_zero_polynomial(e, tol=tol)


def _complex_pair_power(n: int, conjugate: bool) -> tuple[ScalarExpr, ScalarExpr]:
    re, im = ex.ONE, ex.ZERO
    y = ex.neg(ex.X2) if conjugate else ex.X2
    for _ in range(n):
        re, im = (
            ex.sub(ex.mul(ex.X1, re), ex.mul(y, im)),
            ex.add(ex.mul(ex.X1, im), ex.mul(y, re)),
        )
    return re, im


def holomorphic_power(n: int) -> tuple[ScalarExpr, ScalarExpr]:
    """(Re, Im) of z^n as polynomial expressions in (x1, x2)."""
    if n < 0:
        raise ValueError("n must be >= 0")
    return _complex_pair_power(n, conjugate=False)


def conjugate_power(n: int) -> tuple[ScalarExpr, ScalarExpr]:
    """(Re, Im) of conj(z)^n as polynomial expressions in (x1, x2)."""
    if n < 0:
        raise ValueError("n must be >= 0")
    return _complex_pair_power(n, conjugate=True)


def reciprocal_pole(a: complex = 0j) -> tuple[ScalarExpr, ScalarExpr]:
    """(Re, Im) of 1/(z - a) as rational expressions in (x1, x2)."""
    dx = ex.sub(ex.X1, ex.Const(a.real))
    dy = ex.sub(ex.X2, ex.Const(a.imag))
    denom = ex.add(ex.power(dx, 2), ex.power(dy, 2))
    return ex.div(dx, denom), ex.div(ex.neg(dy), denom)
