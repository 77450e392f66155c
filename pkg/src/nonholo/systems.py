"""Nonholonomic integrator systems and their simulation.

Every variant has base coordinates driven directly by the inputs
(dx_i/dt = u_i) plus one or more fiber coordinates driven by a field
evaluated along the base path:

- Classic:       3 states, fiber rate -x2 u1 + x1 u2 (twice the swept area)
- General2D:     3 states, fiber rate f1(x) u1 + f2(x) u2 for a planar field
- General3D:     4 states, fiber rate f(x) . u for a spatial field
- Drift3D:       4 states, fiber rate g(x) + f(x) . u
- AreaPairs(m):  m inputs, one area-form fiber x_ij per pair i < j
- FieldPairs(m): m inputs, fiber rate f_i(x_i, x_j) u_i + f_j(x_i, x_j) u_j
- ComplexPlane:  4 states; fiber (w1, w2) with dw/dt = F(z) (u1 + i u2)
                 for F = re + i im and z = x1 + i x2

Two independent routes to the fiber displacement are provided: fixed-step
RK4 (:func:`simulate`) and Gauss-Legendre quadrature along the exact base
path (:func:`fiber_displacement`).  Their agreement is a meaningful
consistency check because they share no numerics.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence, Union

import numpy as np

from . import expr as ex
from .fields import GUARD_RADIUS, ExcludedSetError, VectorField
from .quad import integrate_smooth
from .signals import InputSignal
from .expr import ScalarExpr

__all__ = [
    "Classic",
    "General2D",
    "General3D",
    "Drift3D",
    "AreaPairs",
    "FieldPairs",
    "ComplexPlane",
    "SystemModel",
    "Trajectory",
    "state_dim",
    "input_dim",
    "pair_order",
    "as_general2d",
    "simulate",
    "fiber_displacement",
    "trajectory_csv",
]

_STEP_TOL = 1e-12


@dataclass(frozen=True)
class Classic:
    """The classic planar integrator: fiber rate -x2 u1 + x1 u2."""


@dataclass(frozen=True)
class General2D:
    """Planar integrator with fiber rate f1(x1, x2) u1 + f2(x1, x2) u2."""

    field: VectorField

    def __post_init__(self) -> None:
        if self.field.dim != 2:
            raise ValueError("General2D requires a 2-component field")


@dataclass(frozen=True)
class General3D:
    """Spatial integrator with fiber rate f(x1, x2, x3) . u."""

    field: VectorField

    def __post_init__(self) -> None:
        if self.field.dim != 3:
            raise ValueError("General3D requires a 3-component field")


@dataclass(frozen=True)
class Drift3D:
    """Spatial integrator with uncontrolled drift: fiber rate g(x) + f(x) . u."""

    field: VectorField
    drift: ScalarExpr

    def __post_init__(self) -> None:
        if self.field.dim != 3:
            raise ValueError("Drift3D requires a 3-component field")


@dataclass(frozen=True)
class AreaPairs:
    """m base coordinates with one area-form fiber per pair (i < j)."""

    m: int

    def __post_init__(self) -> None:
        if self.m < 2:
            raise ValueError("AreaPairs requires m >= 2")


@dataclass(frozen=True)
class FieldPairs:
    """m base coordinates with a planar pair field per fiber.

    ``pairs`` maps (i, j) with 1 <= i < j <= m to a 2-component field whose
    x1/x2 stand for x_i/x_j.  The fiber x_ij obeys
    dx_ij/dt = f_i(x_i, x_j) u_i + f_j(x_i, x_j) u_j.
    """

    m: int
    pairs: tuple[tuple[tuple[int, int], VectorField], ...]

    def __post_init__(self) -> None:
        if self.m < 2:
            raise ValueError("FieldPairs requires m >= 2")
        want = pair_order(self.m)
        got = tuple(k for k, _ in self.pairs)
        if got != tuple(want):
            raise ValueError(f"pairs must be exactly {want} in order, got {got}")
        for _, f in self.pairs:
            if f.dim != 2:
                raise ValueError("pair fields must have 2 components")

    @classmethod
    def from_dict(cls, m: int, mapping: Mapping[tuple[int, int], VectorField]) -> "FieldPairs":
        return cls(m, tuple((k, mapping[k]) for k in pair_order(m)))

    def field_for(self, i: int, j: int) -> VectorField:
        for k, f in self.pairs:
            if k == (i, j):
                return f
        raise KeyError((i, j))


@dataclass(frozen=True)
class ComplexPlane:
    """Planar base z = x1 + i x2 with complex fiber rate F(z) (u1 + i u2).

    ``re``/``im`` are the real and imaginary parts of F.  ``poles`` declares
    isolated singularities of F; trajectories and integrals must stay
    outside their guard radius.
    """

    re: ScalarExpr
    im: ScalarExpr
    poles: tuple[tuple[float, float], ...] = ()
    note: str = ""

    def __post_init__(self) -> None:
        object.__setattr__(
            self, "poles", tuple((float(p[0]), float(p[1])) for p in self.poles)
        )


SystemModel = Union[Classic, General2D, General3D, Drift3D, AreaPairs, FieldPairs, ComplexPlane]


def pair_order(m: int) -> list[tuple[int, int]]:
    """Lexicographic fiber order: (1,2), (1,3), ..., (m-1,m)."""
    return [(i, j) for i in range(1, m + 1) for j in range(i + 1, m + 1)]


def state_dim(sys: SystemModel) -> int:
    if isinstance(sys, Classic):
        return 3
    if isinstance(sys, General2D):
        return 3
    if isinstance(sys, (General3D, Drift3D, ComplexPlane)):
        return 4
    if isinstance(sys, (AreaPairs, FieldPairs)):
        return sys.m + sys.m * (sys.m - 1) // 2
    raise TypeError(f"not a system model: {sys!r}")


def input_dim(sys: SystemModel) -> int:
    if isinstance(sys, (Classic, General2D, ComplexPlane)):
        return 2
    if isinstance(sys, (General3D, Drift3D)):
        return 3
    if isinstance(sys, (AreaPairs, FieldPairs)):
        return sys.m
    raise TypeError(f"not a system model: {sys!r}")


def base_dim(sys: SystemModel) -> int:
    if isinstance(sys, (Classic, General2D, ComplexPlane)):
        return 2
    if isinstance(sys, (General3D, Drift3D)):
        return 3
    if isinstance(sys, (AreaPairs, FieldPairs)):
        return sys.m
    raise TypeError(f"not a system model: {sys!r}")


_CLASSIC_FIELD = VectorField((ex.neg(ex.X2), ex.X1))


def as_general2d(sys: Union[Classic, General2D]) -> General2D:
    """View the classic integrator as a planar field system."""
    if isinstance(sys, Classic):
        return General2D(_CLASSIC_FIELD)
    if isinstance(sys, General2D):
        return sys
    raise TypeError("only Classic and General2D have a planar field form")


def _expand_area_pairs(sys: AreaPairs) -> FieldPairs:
    f = VectorField((ex.neg(ex.X2), ex.X1))
    return FieldPairs(sys.m, tuple((k, f) for k in pair_order(sys.m)))


@dataclass(frozen=True)
class Trajectory:
    """Uniform-grid states from :func:`simulate`; first row is the start."""

    ts: np.ndarray
    states: np.ndarray
    signal: InputSignal
    step: float

    @property
    def start(self) -> np.ndarray:
        return self.states[0]

    @property
    def end(self) -> np.ndarray:
        return self.states[-1]


def _compiled_rhs(sys: SystemModel):
    """rhs(t, x, u) -> list of derivatives, with x and u plain sequences."""
    if isinstance(sys, Classic):
        def rhs(t, x, u):
            return [u[0], u[1], x[0] * u[1] - x[1] * u[0]]
        return rhs
    if isinstance(sys, General2D):
        c1, c2 = (ex.compile_expr(c) for c in sys.field.components)
        def rhs(t, x, u):
            return [u[0], u[1], c1(x) * u[0] + c2(x) * u[1]]
        return rhs
    if isinstance(sys, General3D):
        c1, c2, c3 = (ex.compile_expr(c) for c in sys.field.components)
        def rhs(t, x, u):
            return [u[0], u[1], u[2], c1(x) * u[0] + c2(x) * u[1] + c3(x) * u[2]]
        return rhs
    if isinstance(sys, Drift3D):
        c1, c2, c3 = (ex.compile_expr(c) for c in sys.field.components)
        g = ex.compile_expr(sys.drift)
        def rhs(t, x, u):
            return [
                u[0],
                u[1],
                u[2],
                g(x) + c1(x) * u[0] + c2(x) * u[1] + c3(x) * u[2],
            ]
        return rhs
    if isinstance(sys, AreaPairs):
        return _compiled_rhs(_expand_area_pairs(sys))
    if isinstance(sys, FieldPairs):
        m = sys.m
        compiled = [
            (i - 1, j - 1, ex.compile_expr(f.components[0]), ex.compile_expr(f.components[1]))
            for (i, j), f in sys.pairs
        ]
        def rhs(t, x, u):
            out = list(u[:m])
            for i0, j0, fi, fj in compiled:
                p = (x[i0], x[j0])
                out.append(fi(p) * u[i0] + fj(p) * u[j0])
            return out
        return rhs
    if isinstance(sys, ComplexPlane):
        fre = ex.compile_expr(sys.re)
        fim = ex.compile_expr(sys.im)
        def rhs(t, x, u):
            re_v, im_v = fre(x), fim(x)
            return [
                u[0],
                u[1],
                re_v * u[0] - im_v * u[1],
                im_v * u[0] + re_v * u[1],
            ]
        return rhs
    raise TypeError(f"not a system model: {sys!r}")


def _guard_points(sys: SystemModel) -> tuple[tuple[float, ...], ...]:
    if isinstance(sys, (General2D, General3D, Drift3D)):
        return sys.field.excluded
    if isinstance(sys, ComplexPlane):
        return sys.poles
    return ()


def _check_guard(sys: SystemModel, x: Sequence[float]) -> None:
    pts = _guard_points(sys)
    if not pts:
        return
    for p in pts:
        if sum((x[k] - p[k]) ** 2 for k in range(len(p))) < GUARD_RADIUS**2:
            raise ExcludedSetError(
                f"trajectory entered the guard radius of excluded point {p}"
            )


def resolve_steps(T: float, step: float) -> int:
    """Number of RK4 steps; rejects steps that do not divide the horizon."""
    if step <= 0:
        raise ValueError("step must be positive")
    n = round(T / step)
    if n < 1 or abs(n * step - T) > _STEP_TOL * max(1.0, abs(T)):
        raise ValueError(f"step {step} does not divide horizon {T}")
    return n


def simulate(
    sys: SystemModel,
    signal: InputSignal,
    x0: Sequence[float],
    T: float,
    step: float | None = None,
) -> Trajectory:
    """Fixed-step RK4 on the uniform grid {0, step, ..., T}.

    The step must divide T exactly (to within 1e-12); anything else is
    rejected rather than silently adjusted.  Steps straddling a signal
    piece boundary are split there and integrated as sub-steps with
    one-sided input samples, so piecewise inputs keep fourth-order
    accuracy without any grid alignment requirement.
    """
    if T <= 0:
        raise ValueError("horizon must be positive")
    if abs(signal.duration - T) > _STEP_TOL * max(1.0, abs(T)):
        raise ValueError(f"signal duration {signal.duration} differs from horizon {T}")
    if signal.n_channels != input_dim(sys):
        raise ValueError(
            f"system expects {input_dim(sys)} input channels, signal has {signal.n_channels}"
        )
    dim = state_dim(sys)
    if len(x0) != dim:
        raise ValueError(f"state dimension is {dim}, start has {len(x0)}")
    if step is None:
        step = 1e-3 * T
    n = resolve_steps(T, step)
    rhs = _compiled_rhs(sys)
    width_tol = 1e-12 * max(1.0, T)

    # Segments between consecutive piece boundaries; within each, one
    # closure per channel evaluates its unique piece.
    piece_evs = [signal.piece_evaluators(k) for k in range(signal.n_channels)]
    bounds = _segment_bounds(signal, T)
    segments: list[tuple[float, list]] = []
    for a, b in zip(bounds, bounds[1:]):
        if b - a <= width_tol:
            continue
        mid = 0.5 * (a + b)
        fs = []
        for evs in piece_evs:
            for p0, p1, f in evs:
                if p0 - width_tol <= mid <= p1 + width_tol:
                    fs.append((p0, f))
                    break
            else:
                raise AssertionError("segment midpoint outside every piece")
        segments.append((b, fs))
    interior = [c for c in bounds if width_tol < c < T - width_tol]

    x = [float(v) for v in x0]
    _check_guard(sys, x)
    states = np.empty((n + 1, dim))
    states[0] = x
    h = step
    si = 0
    ci = 0
    for k in range(n):
        t0k = k * h
        t1k = min((k + 1) * h, T)
        subs = [t0k]
        while ci < len(interior) and interior[ci] < t1k - width_tol:
            if interior[ci] > t0k + width_tol:
                subs.append(interior[ci])
            ci += 1
        subs.append(t1k)
        for a, b in zip(subs, subs[1:]):
            m = 0.5 * (a + b)
            while segments[si][0] < m:
                si += 1
            fs = segments[si][1]
            ua = tuple(f(a - p0) for p0, f in fs)
            um = tuple(f(m - p0) for p0, f in fs)
            ub = tuple(f(b - p0) for p0, f in fs)
            hh = b - a
            k1 = rhs(a, x, ua)
            x1 = [x[i] + 0.5 * hh * k1[i] for i in range(dim)]
            k2 = rhs(m, x1, um)
            x2 = [x[i] + 0.5 * hh * k2[i] for i in range(dim)]
            k3 = rhs(m, x2, um)
            x3 = [x[i] + hh * k3[i] for i in range(dim)]
            k4 = rhs(b, x3, ub)
            x = [
                x[i] + hh / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])
                for i in range(dim)
            ]
        _check_guard(sys, x)
        states[k + 1] = x
    ts = np.linspace(0.0, T, n + 1)
    return Trajectory(ts=ts, states=states, signal=signal, step=step)


def _base_path(signal: InputSignal, x0: Sequence[float], nb: int):
    """Exact base coordinates as a function of a time array."""

    def path(ts: np.ndarray) -> list[np.ndarray]:
        return [x0[i] + signal.channel_integral(i, ts) for i in range(nb)]

    return path


def _segment_bounds(signal: InputSignal, T: float) -> list[float]:
    cuts = {0.0, T}
    for ch in signal.channels:
        for piece in ch:
            cuts.add(piece.t0)
            cuts.add(piece.t1)
    return sorted(c for c in cuts if 0.0 <= c <= T)


def _integrate_piecewise(g, bounds: list[float], rtol: float) -> float:
    total = 0.0
    for a, b in zip(bounds, bounds[1:]):
        if b > a:
            total += integrate_smooth(g, a, b, rtol=rtol)
    return total


def fiber_displacement(
    sys: SystemModel,
    signal: InputSignal,
    x0: Sequence[float],
    T: float,
    rtol: float = 1e-10,
):
    """Fiber change over [0, T] by quadrature along the exact base path.

    Returns a float for single-fiber systems, a dict keyed by (i, j) for
    the pair systems, and a (w1, w2) tuple for the complex-plane system.
    Entirely independent of :func:`simulate`: the base path comes from
    closed-form antiderivatives of the input pieces and the fiber integral
    from panel-doubled Gauss-Legendre quadrature.
    """
    if signal.n_channels != input_dim(sys):
        raise ValueError(
            f"system expects {input_dim(sys)} input channels, signal has {signal.n_channels}"
        )
    nb = base_dim(sys)
    if len(x0) < nb:
        raise ValueError("start state too short for the base coordinates")
    path = _base_path(signal, x0, nb)
    bounds = _segment_bounds(signal, T)

    def u_all(ts: np.ndarray) -> list[np.ndarray]:
        return [signal.channel_value(k, ts) for k in range(signal.n_channels)]

    if isinstance(sys, Classic):
        def g(ts: np.ndarray) -> np.ndarray:
            x1, x2 = path(ts)
            u1, u2 = u_all(ts)
            return x1 * u2 - x2 * u1
        return _integrate_piecewise(g, bounds, rtol)

    if isinstance(sys, (General2D, General3D)):
        field = sys.field
        def g(ts: np.ndarray) -> np.ndarray:
            xs = path(ts)
            us = u_all(ts)
            comps = field(xs)
            return sum(c * u for c, u in zip(comps, us))
        return _integrate_piecewise(g, bounds, rtol)

    if isinstance(sys, Drift3D):
        field = sys.field
        drift = sys.drift
        def g(ts: np.ndarray) -> np.ndarray:
            xs = path(ts)
            us = u_all(ts)
            comps = field(xs)
            total = sum(c * u for c, u in zip(comps, us))
            return total + ex.evaluate(drift, xs) + np.zeros_like(ts)
        return _integrate_piecewise(g, bounds, rtol)

    if isinstance(sys, AreaPairs):
        return fiber_displacement(_expand_area_pairs(sys), signal, x0, T, rtol)

    if isinstance(sys, FieldPairs):
        out = {}
        for (i, j), f in sys.pairs:
            def g(ts: np.ndarray, i=i, j=j, f=f) -> np.ndarray:
                xi = x0[i - 1] + signal.channel_integral(i - 1, ts)
                xj = x0[j - 1] + signal.channel_integral(j - 1, ts)
                fi, fj = f((xi, xj))
                ui = signal.channel_value(i - 1, ts)
                uj = signal.channel_value(j - 1, ts)
                return fi * ui + fj * uj
            out[(i, j)] = _integrate_piecewise(g, bounds, rtol)
        return out

    if isinstance(sys, ComplexPlane):
        def w1_rate(ts: np.ndarray) -> np.ndarray:
            xs = path(ts)
            _pole_guard(sys, xs)
            u1, u2 = u_all(ts)
            re_v = ex.evaluate(sys.re, xs)
            im_v = ex.evaluate(sys.im, xs)
            return re_v * u1 - im_v * u2
        def w2_rate(ts: np.ndarray) -> np.ndarray:
            xs = path(ts)
            _pole_guard(sys, xs)
            u1, u2 = u_all(ts)
            re_v = ex.evaluate(sys.re, xs)
            im_v = ex.evaluate(sys.im, xs)
            return im_v * u1 + re_v * u2
        return (
            _integrate_piecewise(w1_rate, bounds, rtol),
            _integrate_piecewise(w2_rate, bounds, rtol),
        )

    raise TypeError(f"not a system model: {sys!r}")


def _pole_guard(sys: ComplexPlane, xs) -> None:
    for p in sys.poles:
        d2 = (xs[0] - p[0]) ** 2 + (xs[1] - p[1]) ** 2
        if np.min(d2) < GUARD_RADIUS**2:
            raise ExcludedSetError(f"base path entered the guard radius of pole {p}")


def trajectory_csv(traj: Trajectory) -> str:
    """CSV text with header t,x1,...,xn and full double precision."""
    dim = traj.states.shape[1]
    header = "t," + ",".join(f"x{i + 1}" for i in range(dim))
    lines = [header]
    for t, row in zip(traj.ts, traj.states):
        lines.append(",".join(f"{v:.17g}" for v in (t, *row)))
    return "\n".join(lines) + "\n"
