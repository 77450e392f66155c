"""Open-loop steering planners.

Fiber coordinates move only through circulation, so every planner here
shapes closed or piecewise-closed base paths whose enclosed "area against
the field" hits the requested fiber displacement:

- ``plan_sinusoid_classic``: one circular arc through the origin for the
  classic pair-area system, amplitude chosen in closed form.
- ``plan_loop_scaling``: a circle anchored at the start point whose radius
  is root-found against the quadrature fiber gain; works for any planar or
  spatial field.
- ``plan_two_phase``: straight-line constants to the base target, then an
  anchored loop to repair the fiber.
- ``plan_residue_chain``: two tangent circles through the origin steering
  both fiber components of the conjugate-power complex system.

Planners predict endpoints by quadrature (`fiber_displacement`), never by
the RK4 simulator, so `verify_plan` remains an independent check.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .fields import conjugate_power
from .signals import Constant, InputSignal, Sinusoid
from .systems import (
    Classic,
    ComplexPlane,
    Drift3D,
    General2D,
    General3D,
    SystemModel,
    base_dim,
    fiber_displacement,
    input_dim,
    simulate,
    state_dim,
)

__all__ = [
    "SteeringError",
    "Phase",
    "SteeringPlan",
    "plan_sinusoid_classic",
    "plan_loop_scaling",
    "plan_two_phase",
    "plan_residue_chain",
    "conjugate_system",
    "to_signal",
    "plan_energy",
    "plan_to_dict",
    "verify_plan",
]

Piece = Constant | Sinusoid


class SteeringError(RuntimeError):
    """The requested displacement is not reachable by this planner."""


@dataclass(frozen=True)
class Phase:
    """One segment of a plan: each channel holds a single signal piece
    defined on [0, duration] local time."""

    duration: float
    channels: tuple[Piece, ...]

    def __post_init__(self) -> None:
        if self.duration <= 0:
            raise ValueError("phase duration must be positive")
        for p in self.channels:
            if abs(p.t0) > 1e-12 or abs(p.t1 - self.duration) > 1e-12:
                raise ValueError("phase pieces must span [0, duration]")


@dataclass(frozen=True)
class SteeringPlan:
    method: str
    phases: tuple[Phase, ...]
    predicted_endpoint: tuple[float, ...]

    @property
    def duration(self) -> float:
        return sum(p.duration for p in self.phases)


def _shift(piece: Piece, offset: float) -> Piece:
    if isinstance(piece, Constant):
        return Constant(piece.t0 + offset, piece.t1 + offset, piece.value)
    return Sinusoid(
        piece.t0 + offset,
        piece.t1 + offset,
        piece.amplitude,
        piece.omega,
        piece.phase,
    )


def to_signal(plan: SteeringPlan) -> InputSignal:
    """Concatenate the phases into one input signal on [0, total duration]."""
    n = len(plan.phases[0].channels)
    chans: list[list[Piece]] = [[] for _ in range(n)]
    t = 0.0
    for phase in plan.phases:
        for k, piece in enumerate(phase.channels):
            chans[k].append(_shift(piece, t))
        t += phase.duration
    return InputSignal(tuple(tuple(c) for c in chans), t)


def plan_energy(plan: SteeringPlan) -> float:
    """Integral of |u|^2 over the plan."""
    return to_signal(plan).energy()


def _piece_dict(piece: Piece) -> dict:
    if isinstance(piece, Constant):
        return {"kind": "constant", "params": {"value": piece.value}}
    return {
        "kind": "sinusoid",
        "params": {
            "amplitude": piece.amplitude,
            "omega": piece.omega,
            "phase": piece.phase,
        },
    }


def plan_to_dict(plan: SteeringPlan) -> dict:
    """Stable key order for serialization."""
    return {
        "method": plan.method,
        "phases": [
            {
                "duration": phase.duration,
                "channels": [_piece_dict(p) for p in phase.channels],
            }
            for phase in plan.phases
        ],
        "predicted_endpoint": list(plan.predicted_endpoint),
    }


def plan_sinusoid_classic(a: float, T: float = 1.0) -> SteeringPlan:
    """Steer the classic system from the origin to (0, 0, a) in time T.

    The base traces one full circle through the origin at angular rate
    2*pi/T, oriented by the sign of the target, with amplitude fixed by
    the swept-area identity: |u|^2 = 2*pi*|a| / T^2, so the control
    energy is 2*pi*|a| / T.
    """
    if T <= 0:
        raise ValueError("duration must be positive")
    if a == 0.0:
        phase = Phase(T, (Constant(0.0, T, 0.0), Constant(0.0, T, 0.0)))
        return SteeringPlan("sinusoid-classic", (phase,), (0.0, 0.0, 0.0))
    c = 2.0 * math.pi * math.copysign(1.0, a) / T
    amp = math.sqrt(2.0 * math.pi * abs(a)) / T
    # u1 = amp*cos(c t + pi/4), u2 = amp*sin(c t + pi/4): equal at t = 0
    ch1 = Sinusoid(0.0, T, amp, c, math.pi / 4.0)
    ch2 = Sinusoid(0.0, T, amp, c, math.pi / 4.0 - math.pi / 2.0)
    phase = Phase(T, (ch1, ch2))
    return SteeringPlan("sinusoid-classic", (phase,), (0.0, 0.0, float(a)))


def _anchored_loop_phase(
    anchor: Sequence[float],
    radius: float,
    orientation: int,
    duration: float,
    plane: tuple[int, int],
    n_channels: int,
) -> Phase:
    """A circle through ``anchor`` in the given base plane, traversed once.

    Parametrized x(t) = anchor + r*(cos(w t) - 1, o*sin(w t)) on the plane
    axes, so u_a = -r w sin(w t) and u_b = o r w cos(w t).
    """
    w = 2.0 * math.pi / duration
    a, b = plane
    channels: list[Piece] = [Constant(0.0, duration, 0.0) for _ in range(n_channels)]
    channels[a] = Sinusoid(0.0, duration, radius * w, w, math.pi / 2.0)
    channels[b] = Sinusoid(0.0, duration, orientation * radius * w, w, 0.0)
    return Phase(duration, tuple(channels))


def _loop_gain(
    sys: SystemModel,
    anchor: Sequence[float],
    duration: float,
    plane: tuple[int, int],
    n_channels: int,
    base_start: Sequence[float],
) -> Callable[[float, int], float]:
    """Fiber displacement of the anchored loop as a function of (radius,
    orientation), evaluated by quadrature."""
    d = len(base_start)

    def gain(radius: float, orientation: int) -> float:
        phase = _anchored_loop_phase(
            anchor, radius, orientation, duration, plane, n_channels
        )
        sig = to_signal(SteeringPlan("probe", (phase,), ()))
        x0 = list(base_start) + [0.0] * (state_dim(sys) - d)
        disp = fiber_displacement(sys, sig, x0, duration)
        return float(disp)

    return gain


_MAX_RADIUS = 1.024e3
_MIN_RADIUS = 1.0e-6


def _solve_radius(
    gain: Callable[[float, int], float],
    target: float,
    rtol: float = 1.0e-8,
) -> tuple[float, int, float]:
    """Find (radius, orientation) with gain(radius, orientation) = target.

    Radii are swept geometrically to bracket the target for each
    orientation; the bracket is then closed by bisection with a secant
    step when it falls inside the bracket.
    """
    scale = max(1.0, abs(target))
    for orientation in (1, -1):
        vals: list[tuple[float, float]] = []
        r = 1.0
        while r >= _MIN_RADIUS:
            vals.append((r, gain(r, orientation)))
            r /= 2.0
        r = 2.0
        while r <= _MAX_RADIUS:
            vals.append((r, gain(r, orientation)))
            r *= 2.0
        vals.sort()
        for (r0, g0), (r1, g1) in zip(vals, vals[1:]):
            h0, h1 = g0 - target, g1 - target
            if abs(h0) <= rtol * scale:
                return r0, orientation, g0
            if abs(h1) <= rtol * scale:
                return r1, orientation, g1
            if h0 * h1 < 0.0:
                lo, hi, hlo, hhi = r0, r1, h0, h1
                for _ in range(200):
                    mid = lo + hlo * (lo - hi) / (hhi - hlo)  # secant
                    if not (lo < mid < hi):
                        mid = 0.5 * (lo + hi)
                    hm = gain(mid, orientation) - target
                    if abs(hm) <= rtol * scale or (hi - lo) <= 1e-14 * hi:
                        return mid, orientation, hm + target
                    if hlo * hm < 0.0:
                        hi, hhi = mid, hm
                    else:
                        lo, hlo = mid, hm
                return mid, orientation, hm + target
    raise SteeringError(
        f"no anchored loop with radius in [{_MIN_RADIUS:g}, {_MAX_RADIUS:g}] "
        f"reaches fiber displacement {target:g}"
    )


def _spatial_planes(sys: SystemModel) -> list[tuple[int, int]]:
    return [(0, 1)] if base_dim(sys) == 2 else [(0, 1), (0, 2), (1, 2)]


def plan_loop_scaling(
    sys: SystemModel,
    fiber_target: float,
    T: float = 1.0,
    x0: Optional[Sequence[float]] = None,
) -> SteeringPlan:
    """One anchored loop returning the base to its start while moving the
    single fiber coordinate by ``fiber_target``.

    Supports the planar and spatial single-fiber systems.  For spatial
    fields the loop plane is chosen by probing the unit-radius gain in
    each coordinate plane and keeping the strongest.
    """
    if not isinstance(sys, (Classic, General2D, General3D, Drift3D)):
        raise SteeringError("loop scaling needs a single-fiber system")
    if T <= 0:
        raise ValueError("duration must be positive")
    d = base_dim(sys)
    n = state_dim(sys)
    if x0 is None:
        x0 = [0.0] * n
    base = list(x0[:d])
    m = input_dim(sys)

    if fiber_target == 0.0:
        phase = Phase(T, tuple(Constant(0.0, T, 0.0) for _ in range(m)))
        return SteeringPlan(
            "loop-scaling", (phase,), tuple(float(v) for v in x0)
        )

    planes = _spatial_planes(sys)
    if len(planes) > 1:
        probes = []
        for plane in planes:
            g = _loop_gain(sys, base, T, plane, m, base)
            probes.append((abs(g(1.0, 1)), plane))
        probes.sort(reverse=True)
        planes = [p for _, p in probes]

    last_err: Optional[SteeringError] = None
    for plane in planes:
        gain = _loop_gain(sys, base, T, plane, m, base)
        try:
            radius, orientation, achieved = _solve_radius(gain, fiber_target)
        except SteeringError as err:
            last_err = err
            continue
        phase = _anchored_loop_phase(base, radius, orientation, T, plane, m)
        endpoint = list(base) + [float(x0[d]) + achieved]
        return SteeringPlan("loop-scaling", (phase,), tuple(endpoint))
    raise last_err


def plan_two_phase(
    sys: SystemModel,
    frm: Sequence[float],
    to: Sequence[float],
    T: float = 1.0,
) -> SteeringPlan:
    """Constant inputs to the base target, then an anchored loop for the
    fiber remainder.

    Phase one runs straight-line constants over [0, T/2] and generally
    drifts the fiber; the drift is computed by quadrature and folded into
    the loop target for phase two.
    """
    if not isinstance(sys, (Classic, General2D, General3D, Drift3D)):
        raise SteeringError("two-phase steering needs a single-fiber system")
    if T <= 0:
        raise ValueError("duration must be positive")
    d = base_dim(sys)
    n = state_dim(sys)
    m = input_dim(sys)
    frm = [float(v) for v in frm]
    to = [float(v) for v in to]
    if len(frm) != n or len(to) != n:
        raise ValueError(f"states must have dimension {n}")

    half = 0.5 * T
    consts = [(to[k] - frm[k]) / half for k in range(d)]
    phase_a = Phase(half, tuple(Constant(0.0, half, c) for c in consts))
    sig_a = to_signal(SteeringPlan("probe", (phase_a,), ()))
    drift = float(fiber_displacement(sys, sig_a, frm, half))
    fiber_after_a = frm[d] + drift
    rem = to[d] - fiber_after_a

    anchor = to[:d]
    planes = _spatial_planes(sys)
    if len(planes) > 1:
        probes = []
        for plane in planes:
            g = _loop_gain(sys, anchor, half, plane, m, anchor)
            probes.append((abs(g(1.0, 1)), plane))
        probes.sort(reverse=True)
        planes = [p for _, p in probes]

    if abs(rem) <= 1e-12 * max(1.0, abs(to[d])):
        phase_b = Phase(half, tuple(Constant(0.0, half, 0.0) for _ in range(m)))
        endpoint = to[:d] + [fiber_after_a]
        return SteeringPlan("two-phase", (phase_a, phase_b), tuple(endpoint))

    last_err: Optional[SteeringError] = None
    for plane in planes:
        gain = _loop_gain(sys, anchor, half, plane, m, anchor)
        try:
            radius, orientation, achieved = _solve_radius(gain, rem)
        except SteeringError as err:
            last_err = err
            continue
        phase_b = _anchored_loop_phase(anchor, radius, orientation, half, plane, m)
        endpoint = to[:d] + [fiber_after_a + achieved]
        return SteeringPlan("two-phase", (phase_a, phase_b), tuple(endpoint))
    raise last_err


def conjugate_system(n: int, poles: Sequence[tuple[float, float]] = ()) -> ComplexPlane:
    """The complex-plane system whose rate is the n-th conjugate power."""
    re, im = conjugate_power(n)
    return ComplexPlane(re, im, tuple(poles), note=f"conjugate power {n}")


def _residue_phase_one(c: float, w: int) -> Phase:
    # z(t) = c (1 - e^{2 pi i w t}): circle through 0 centered at c
    two_pi = 2.0 * math.pi
    ch1 = Sinusoid(0.0, 1.0, two_pi * c, two_pi, -math.pi / 2.0)
    ch2 = Sinusoid(0.0, 1.0, -two_pi * c * w, two_pi, 0.0)
    return Phase(1.0, (ch1, ch2))


def _residue_phase_two(c: float, w: int, n: int) -> Phase:
    # z(t) = c (e^{i pi/n} - e^{i (pi/n)(1 + w t)}): circle through 0
    # centered at c e^{i pi/n}, traversed once over duration 2n
    omega = (math.pi / n) * w
    dur = 2.0 * n
    ch1 = Sinusoid(0.0, dur, c * omega, omega, math.pi / n - math.pi / 2.0)
    ch2 = Sinusoid(0.0, dur, -c * omega, omega, math.pi / n)
    return Phase(dur, (ch1, ch2))


def plan_residue_chain(n: int, a: float, b: float) -> SteeringPlan:
    """Steer the conjugate-power system z' = u, w' = conj(z)^n u from the
    origin to fiber (a, b) with the base returning to zero.

    Two circles through the origin are chained: the first centered on the
    positive real axis (contributing only to the second fiber component),
    the second centered at angle pi/n.  A circle of radius c centered at
    p with |p| = c contributes 2 n pi i c^{n+1} (p/|p|)^{n-1} per positive
    winding, so the two contributions form an invertible 2x2 system
    whenever n >= 2.  Multipliers are realized by scaling each radius as
    |alpha|^{1/(n+1)} and flipping the winding for negative signs, which
    keeps every loop closed and the base endpoint exact.

    Total duration is 1 + 2n (phase one takes unit time, phase two one
    full turn at angular rate pi/n).
    """
    if n < 2:
        raise SteeringError(
            "conjugate power 1 moves only one fiber direction; "
            "two independent residue directions need n >= 2"
        )
    two_npi = 2.0 * n * math.pi
    s, c_ = math.sin(math.pi / n), math.cos(math.pi / n)
    alpha2 = a / (two_npi * s)
    alpha1 = (b + two_npi * c_ * alpha2) / two_npi

    def realize(alpha: float) -> tuple[float, int]:
        if alpha == 0.0:
            return 0.0, 1
        return abs(alpha) ** (1.0 / (n + 1)), 1 if alpha > 0 else -1

    c1, w1 = realize(alpha1)
    c2, w2 = realize(alpha2)
    phases = (_residue_phase_one(c1, w1), _residue_phase_two(c2, w2, n))
    return SteeringPlan(
        "residue-chain", phases, (0.0, 0.0, float(a), float(b))
    )


def verify_plan(
    sys: SystemModel,
    plan: SteeringPlan,
    x0: Sequence[float],
    step: Optional[float] = None,
    tol: float = 1.0e-6,
) -> dict:
    """Simulate the plan and compare against its predicted endpoint.

    The simulation route (RK4 on the full state) is independent of the
    quadrature route used while planning, so agreement is meaningful.
    """
    sig = to_signal(plan)
    traj = simulate(sys, sig, x0, sig.duration, step)
    end = traj.end
    pred = np.asarray(plan.predicted_endpoint, dtype=float)
    err = float(np.max(np.abs(end - pred)))
    return {
        "endpoint": [float(v) for v in end],
        "predicted": [float(v) for v in pred],
        "max_error": err,
        "ok": err <= tol,
    }
