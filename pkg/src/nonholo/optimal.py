"""Extremal flows and two-point shooting for planar fiber systems.

For base dynamics x' = u with fiber rate f . u the control equals the
base velocity, so extremals are second-order flows on the base plane.
Three cost/dynamics forms are supported, all parametrized by a constant
fiber multiplier lam and the field's scalar curl w(x):

- energy (minimize the squared input norm):
      x'' = lam * w(x) * J x',          J (a, b) = (-b, a)
- drift (fiber rate carries an uncontrolled term g(x)):
      x'' = -lam * grad g(x) + lam * w(x) * J x'
- state (running state cost g(x) added to the energy):
      x'' = (grad g(x) + lam * w(x) * J x') / 2

Energy-form extremals rotate the velocity without stretching it, so the
speed is an exact invariant; tests lean on that.

`shoot` solves the two-point problem in (lam, u(0)) by damped Newton
iteration over branches indexed by whole turns of the velocity.  For the
field with curl proportional to x1 + x2 the difference coordinate
y = x1 - x2 admits a conserved combination and the sum coordinate
follows a quartic oscillator whose quarter-period clock is an incomplete
elliptic integral; `reduce_oscillator` extracts and cross-checks that
structure from a computed extremal.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from . import expr as ex
from .expr import ScalarExpr, compile_expr, diff
from .fields import VectorField, curl_expr, is_symbolically_zero
from .quad import incomplete_elliptic_f
from .systems import resolve_steps

__all__ = [
    "ExtremalProblem",
    "ExtremalTrajectory",
    "OptimalSolution",
    "OscillatorReduction",
    "extremal_rhs",
    "integrate_extremal",
    "shoot",
    "reduce_oscillator",
    "solution_to_dict",
    "extremal_csv",
]


@dataclass(frozen=True)
class ExtremalProblem:
    """A planar steering problem with fiber target and quadratic cost.

    ``drift`` adds an uncontrolled term to the fiber rate; ``state_cost``
    adds a running cost g(x) to the control energy.  At most one of the
    two may be set.
    """

    field: VectorField
    drift: Optional[ScalarExpr] = None
    state_cost: Optional[ScalarExpr] = None

    def __post_init__(self) -> None:
        if self.field.dim != 2:
            raise ValueError("extremal flows are planar")
        if self.drift is not None and self.state_cost is not None:
            raise ValueError("drift and state cost are mutually exclusive")

    @property
    def form(self) -> str:
        if self.drift is not None:
            return "drift"
        if self.state_cost is not None:
            return "state"
        return "energy"


def extremal_rhs(
    problem: ExtremalProblem, lam: float
) -> Callable[[float, Sequence[float]], tuple[float, ...]]:
    """Right-hand side of the extremal flow on (x1, x2, x3, v1, v2, cost)."""
    w = compile_expr(curl_expr(problem.field))
    f1 = compile_expr(problem.field.components[0])
    f2 = compile_expr(problem.field.components[1])
    form = problem.form
    if form == "drift":
        g = compile_expr(problem.drift)
        gx = compile_expr(diff(problem.drift, 1))
        gy = compile_expr(diff(problem.drift, 2))
    elif form == "state":
        g = compile_expr(problem.state_cost)
        gx = compile_expr(diff(problem.state_cost, 1))
        gy = compile_expr(diff(problem.state_cost, 2))

    if form == "energy":

        def rhs(t: float, y: Sequence[float]) -> tuple[float, ...]:
            p = (y[0], y[1])
            lw = lam * w(p)
            return (
                y[3],
                y[4],
                f1(p) * y[3] + f2(p) * y[4],
                -lw * y[4],
                lw * y[3],
                y[3] * y[3] + y[4] * y[4],
            )

    elif form == "drift":

        def rhs(t: float, y: Sequence[float]) -> tuple[float, ...]:
            p = (y[0], y[1])
            lw = lam * w(p)
            return (
                y[3],
                y[4],
                f1(p) * y[3] + f2(p) * y[4] + g(p),
                -lam * gx(p) - lw * y[4],
                -lam * gy(p) + lw * y[3],
                y[3] * y[3] + y[4] * y[4],
            )

    else:

        def rhs(t: float, y: Sequence[float]) -> tuple[float, ...]:
            p = (y[0], y[1])
            lw = lam * w(p)
            return (
                y[3],
                y[4],
                f1(p) * y[3] + f2(p) * y[4],
                0.5 * (gx(p) - lw * y[4]),
                0.5 * (gy(p) + lw * y[3]),
                y[3] * y[3] + y[4] * y[4] + g(p),
            )

    return rhs


@dataclass(frozen=True)
class ExtremalTrajectory:
    """Samples of an extremal flow: columns x1, x2, x3, v1, v2, cost."""

    ts: np.ndarray
    states: np.ndarray

    @property
    def end(self) -> np.ndarray:
        return self.states[-1]

    def speeds(self) -> np.ndarray:
        return np.hypot(self.states[:, 3], self.states[:, 4])

    @property
    def cost(self) -> float:
        return float(self.states[-1, 5])


def _rk4(
    rhs: Callable[[float, Sequence[float]], tuple[float, ...]],
    y0: Sequence[float],
    T: float,
    n: int,
    record: bool = False,
) -> np.ndarray:
    h = T / n
    y = list(map(float, y0))
    dim = len(y)
    out = np.empty((n + 1, dim)) if record else None
    if record:
        out[0] = y
    for k in range(n):
        t = k * h
        k1 = rhs(t, y)
        y1 = [y[i] + 0.5 * h * k1[i] for i in range(dim)]
        k2 = rhs(t + 0.5 * h, y1)
        y2 = [y[i] + 0.5 * h * k2[i] for i in range(dim)]
        k3 = rhs(t + 0.5 * h, y2)
        y3 = [y[i] + h * k3[i] for i in range(dim)]
        k4 = rhs(t + h, y3)
        y = [
            y[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])
            for i in range(dim)
        ]
        if record:
            out[k + 1] = y
    return out if record else np.asarray(y)


def integrate_extremal(
    problem: ExtremalProblem,
    lam: float,
    x0: Sequence[float],
    v0: Sequence[float],
    T: float,
    step: Optional[float] = None,
) -> ExtremalTrajectory:
    """Integrate the extremal flow from (x0, v0) and record the path."""
    if T <= 0:
        raise ValueError("horizon must be positive")
    if step is None:
        step = 1e-3 * T
    n = resolve_steps(T, step)
    rhs = extremal_rhs(problem, lam)
    y0 = (x0[0], x0[1], x0[2] if len(x0) > 2 else 0.0, v0[0], v0[1], 0.0)
    states = _rk4(rhs, y0, T, n, record=True)
    return ExtremalTrajectory(np.linspace(0.0, T, n + 1), states)


@dataclass(frozen=True)
class OptimalSolution:
    lam: float
    u0: tuple[float, float]
    cost: float
    residual: float
    branch: int


def solution_to_dict(sol: OptimalSolution) -> dict:
    """Stable key order for serialization."""
    return {
        "lambda": sol.lam,
        "u0": list(sol.u0),
        "cost": sol.cost,
        "residual": sol.residual,
        "branch": sol.branch,
    }


def extremal_csv(traj: ExtremalTrajectory) -> str:
    lines = ["t,x1,x2,x3,v1,v2,cost"]
    for t, row in zip(traj.ts, traj.states):
        vals = ",".join("%.17g" % v for v in row)
        lines.append("%.17g,%s" % (t, vals))
    return "\n".join(lines) + "\n"


def _curl_scale(field: VectorField) -> float:
    """Max |curl| over the default box, used to scale multiplier seeds."""
    w = curl_expr(field)
    axes = np.linspace(-2.0, 2.0, 33)
    g1, g2 = np.meshgrid(axes, axes, indexing="ij")
    vals = np.abs(
        np.asarray(ex.evaluate(w, (g1.reshape(-1), g2.reshape(-1))), dtype=float)
        + np.zeros(g1.size)
    )
    vals = vals[np.isfinite(vals)]
    m = float(np.max(vals)) if vals.size else 0.0
    return m if m > 1e-12 else 1.0


def _line_fiber_gain(problem: ExtremalProblem, frm, to, T: float) -> float:
    """Fiber displacement along the straight base path, by Simpson."""
    n = 200
    ts = np.linspace(0.0, 1.0, 2 * n + 1)
    x1 = frm[0] + (to[0] - frm[0]) * ts
    x2 = frm[1] + (to[1] - frm[1]) * ts
    v1 = (to[0] - frm[0]) / T
    v2 = (to[1] - frm[1]) / T
    f1 = ex.evaluate(problem.field.components[0], (x1, x2))
    f2 = ex.evaluate(problem.field.components[1], (x1, x2))
    rate = (np.asarray(f1) * v1 + np.asarray(f2) * v2) + np.zeros_like(ts)
    if problem.drift is not None:
        rate = rate + np.asarray(ex.evaluate(problem.drift, (x1, x2)))
    wts = np.ones_like(ts)
    wts[1:-1:2] = 4.0
    wts[2:-1:2] = 2.0
    return float(np.sum(wts * rate) * (T / (2 * n)) / 3.0)


def shoot(
    problem: ExtremalProblem,
    frm: Sequence[float],
    to: Sequence[float],
    T: float = 1.0,
    step: Optional[float] = None,
    branches: int = 5,
    tol: float = 1e-10,
    max_iter: int = 40,
) -> list[OptimalSolution]:
    """Solve the two-point problem by shooting on (lam, u1(0), u2(0)).

    Seeds sweep velocity-turn multipliers lam = 2 pi k / (w_max T) for
    k = 1/2, 1, ..., branches in both signs, with the start velocity set
    from the straight-line base motion plus an equal-components circular
    correction for the fiber gap, tried in both senses.  Converged
    branches are deduplicated and sorted by cost, so the first entry is
    the best extremal found.  Residuals are max-abs endpoint errors on
    (x1, x2, x3).
    """
    if T <= 0:
        raise ValueError("horizon must be positive")
    frm = [float(v) for v in frm]
    to = [float(v) for v in to]
    if len(frm) != 3 or len(to) != 3:
        raise ValueError("states are (x1, x2, fiber)")
    if step is None:
        step = T / 1000.0
    n = resolve_steps(T, step)

    if max(abs(a - b) for a, b in zip(frm, to)) == 0.0:
        return [OptimalSolution(0.0, (0.0, 0.0), 0.0, 0.0, 0)]

    target = np.asarray(to)

    def endpoint(theta: np.ndarray) -> np.ndarray:
        lam, v1, v2 = theta
        rhs = extremal_rhs(problem, float(lam))
        y0 = (frm[0], frm[1], frm[2], float(v1), float(v2), 0.0)
        return _rk4(rhs, y0, T, n)

    def residual(theta: np.ndarray) -> tuple[np.ndarray, float]:
        y = endpoint(theta)
        return y[:3] - target, float(y[5])

    wbar = _curl_scale(problem.field)
    v_lin = np.array([(to[0] - frm[0]) / T, (to[1] - frm[1]) / T])
    gap = to[2] - frm[2] - _line_fiber_gain(problem, frm, to, T)

    solutions: list[OptimalSolution] = []
    branch_idx = 0
    for k in [0.5] + list(range(1, branches + 1)):
        rate = 2.0 * math.pi * k / T
        amp = math.sqrt(abs(gap) * rate / (wbar * math.pi * k)) if gap else 0.0
        for sgn in (1.0, -1.0):
            for asgn in (1.0,) if amp == 0.0 else (1.0, -1.0):
                lam0 = sgn * rate / wbar
                v0 = v_lin + asgn * amp * np.array([math.sqrt(0.5), math.sqrt(0.5)])
                theta = np.array([lam0, v0[0], v0[1]])
                sol = _newton_lm(residual, theta, tol, max_iter)
                branch_idx += 1
                if sol is None:
                    continue
                theta, res_inf, cost = sol
                if res_inf > 1e-8:
                    continue
                if any(
                    abs(s.lam - theta[0]) < 1e-6
                    and abs(s.u0[0] - theta[1]) < 1e-6
                    and abs(s.u0[1] - theta[2]) < 1e-6
                    for s in solutions
                ):
                    continue
                solutions.append(
                    OptimalSolution(
                        float(theta[0]),
                        (float(theta[1]), float(theta[2])),
                        cost,
                        res_inf,
                        branch_idx,
                    )
                )
        if len(solutions) >= 4:
            break
    solutions.sort(key=lambda s: (s.cost, s.branch))
    return solutions


def _newton_lm(
    residual: Callable[[np.ndarray], tuple[np.ndarray, float]],
    theta: np.ndarray,
    tol: float,
    max_iter: int,
) -> Optional[tuple[np.ndarray, float, float]]:
    """Damped Newton (Levenberg style) with forward-difference Jacobians.

    Steps are accepted on the 2-norm (the natural least-squares merit);
    convergence is declared on the max-norm.  Runs that stall far from a
    root are abandoned early rather than burning the iteration budget.
    """
    r, cost = residual(theta)
    norm = float(np.linalg.norm(r))
    mu = 1e-3
    stalled = 0
    for _ in range(max_iter):
        res_inf = float(np.max(np.abs(r)))
        if res_inf <= tol:
            return theta, res_inf, cost
        J = np.empty((3, 3))
        for j in range(3):
            h = 1e-6 * max(1.0, abs(theta[j]))
            tp = theta.copy()
            tp[j] += h
            rp, _ = residual(tp)
            J[:, j] = (rp - r) / h
        g = J.T @ r
        H = J.T @ J
        improved = False
        for _ in range(12):
            try:
                delta = np.linalg.solve(H + mu * np.eye(3), -g)
            except np.linalg.LinAlgError:
                mu *= 10.0
                continue
            trial = theta + delta
            rt, ct = residual(trial)
            nt = float(np.linalg.norm(rt))
            if nt < norm:
                stalled = stalled + 1 if nt > 0.97 * norm and nt > 1e-6 else 0
                theta, r, norm, cost = trial, rt, nt, ct
                mu = max(mu * 0.3, 1e-14)
                improved = True
                break
            mu *= 10.0
        if not improved or stalled >= 4:
            break
        if float(np.max(np.abs(delta))) < 1e-14:
            break
    res_inf = float(np.max(np.abs(r)))
    if res_inf <= max(tol, 1e-8):
        return theta, res_inf, cost
    return None


@dataclass(frozen=True)
class OscillatorReduction:
    """Reduced structure of an extremal for curl proportional to x1 + x2.

    ``lam`` is the multiplier of the reduced equation (the conserved
    combination is ydot - lam * z^2 / 2 for y = x1 - x2, z = x1 + x2);
    it equals -beta times the extremal multiplier where the field curl is
    beta * (x1 + x2).  ``r`` is the speed in (y, z) coordinates, ``c``
    the conserved constant, and the clock from angle theta (with
    z = z_max sin theta) is an incomplete elliptic integral with modulus
    parameter m = kappa^2 / (kappa^2 + 1).
    """

    lam: float
    r: float
    c: float
    kappa: float
    m: float
    z_max: float
    theta0: float
    speed_sq_spread: float
    invariant_spread: float
    degenerate: bool

    def time_from_angle(self, theta: float) -> float:
        """|t(theta) - t(theta0)| along the reduced oscillator."""
        if self.degenerate:
            raise ValueError("degenerate reduction has no elliptic clock")
        denom = math.sqrt(
            (self.r + self.c) * self.lam * (1.0 + self.kappa**2) / 2.0
        )
        return (
            abs(
                incomplete_elliptic_f(math.pi / 2.0 - self.theta0, self.m)
                - incomplete_elliptic_f(math.pi / 2.0 - theta, self.m)
            )
            / denom
        )

    def angle_of(self, z: float, zdot: float) -> float:
        """The oscillator angle for a (z, zdot) sample."""
        s = min(1.0, max(-1.0, z / self.z_max))
        th = math.asin(s)
        return th if zdot >= 0.0 else math.pi - th


def reduce_oscillator(
    problem: ExtremalProblem,
    lam: float,
    traj: ExtremalTrajectory,
    tol: float = 1e-5,
) -> OscillatorReduction:
    """Extract the conserved pair (r, c) and the elliptic clock data from
    an energy-form extremal of a field whose curl is beta * (x1 + x2).

    Raises if the curl has the wrong shape or if either conservation law
    is violated beyond ``tol`` (relative), which catches both a wrong
    multiplier and an under-resolved trajectory.
    """
    if problem.form != "energy":
        raise ValueError("the reduction applies to the energy form")
    w = curl_expr(problem.field)
    beta = 0.5 * float(ex.evaluate(w, (1.0, 1.0)))
    shape = ex.sub(w, ex.mul(ex.Const(beta), ex.add(ex.X1, ex.X2)))
    if not is_symbolically_zero(shape):
        raise ValueError("field curl is not proportional to x1 + x2")
    lam_red = -lam * beta

    v1 = traj.states[:, 3]
    v2 = traj.states[:, 4]
    z = traj.states[:, 0] + traj.states[:, 1]
    ydot = v1 - v2
    zdot = v1 + v2

    speed_sq = ydot * ydot + zdot * zdot
    r_sq = float(np.mean(speed_sq))
    speed_spread = float(np.std(speed_sq))
    r = math.sqrt(r_sq)
    if speed_spread > tol * max(r_sq, 1e-30):
        raise ValueError(
            f"speed is not conserved (spread {speed_spread:.3g}); "
            "not an energy-form extremal or step too coarse"
        )
    invariant = ydot - lam_red * z * z / 2.0
    c = float(np.mean(invariant))
    inv_spread = float(np.std(invariant))
    if inv_spread > tol * max(r, 1e-30):
        raise ValueError(
            f"reduced invariant is not conserved (spread {inv_spread:.3g}); "
            "multiplier does not match the trajectory"
        )

    degenerate = (
        lam_red <= 0.0 or r - c <= 1e-12 * max(1.0, r) or r + c <= 1e-12 * max(1.0, r)
    )
    if degenerate:
        return OscillatorReduction(
            lam_red, r, c, 0.0, 0.0, 0.0, 0.0, speed_spread, inv_spread, True
        )
    kappa = math.sqrt((r - c) / (r + c))
    m = kappa * kappa / (kappa * kappa + 1.0)
    z_max = math.sqrt(2.0 * (r - c) / lam_red)
    s = min(1.0, max(-1.0, float(z[0]) / z_max))
    theta0 = math.asin(s) if zdot[0] >= 0.0 else math.pi - math.asin(s)
    return OscillatorReduction(
        lam_red,
        r,
        c,
        kappa,
        m,
        z_max,
        theta0,
        speed_spread,
        inv_spread,
        False,
    )
