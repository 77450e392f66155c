"""Trajectory integration: closed-form endpoints, an independent RK4
written here from scratch, the planar area law, and convergence order.

The fiber endpoint is always checked two ways when a quadrature route
exists: simulate() integrates the full ODE while fiber_displacement()
integrates only the fiber rate along the exact base path.  The routes
share no code beyond the system definition.
"""

import math

import numpy as np
import pytest

from nonholo.expr import parse
from nonholo.fields import ExcludedSetError, VectorField, conjugate_power
from nonholo.signals import Constant, InputSignal, Sinusoid, constant_signal
from nonholo.systems import (
    AreaPairs,
    Classic,
    ComplexPlane,
    Drift3D,
    FieldPairs,
    General2D,
    General3D,
    base_dim,
    fiber_displacement,
    input_dim,
    pair_order,
    resolve_steps,
    simulate,
    state_dim,
    trajectory_csv,
)


def field2(f1, f2, **kw):
    return VectorField((parse(f1), parse(f2)), **kw)


def circle_signal(c1, c2, T=1.0):
    w = 2 * math.pi / T
    return InputSignal(
        (
            (Sinusoid(0.0, T, c1, w, 0.0),),
            (Sinusoid(0.0, T, c2, w, -math.pi / 2),),
        ),
        T,
    )


def test_dims():
    assert state_dim(Classic()) == 3
    assert input_dim(Classic()) == 2
    assert base_dim(Classic()) == 2
    sys4 = AreaPairs(3)
    assert base_dim(sys4) == 3
    assert state_dim(sys4) == 6
    assert input_dim(sys4) == 3
    cp = ComplexPlane(*conjugate_power(1))
    assert state_dim(cp) == 4
    assert input_dim(cp) == 2
    assert pair_order(4) == [(1, 2), (1, 3), (1, 4), (2, 3), (2, 4), (3, 4)]


def test_closed_form_odd_square_pair():
    # f = (x2^2, -x1^2), u = (c1 cos 2 pi t, c2 sin 2 pi t), x0 = 0:
    # x3(1) = -c1 c2^2 / (4 pi^2)
    sys = General2D(field2("x2^2", "-x1^2"))
    for c1, c2 in ((2.0, 2 * math.pi), (1.0, 1.0), (-1.5, 2.0)):
        sig = InputSignal(
            (
                (Sinusoid(0.0, 1.0, c1, 2 * math.pi, 0.0),),
                (Sinusoid(0.0, 1.0, c2, 2 * math.pi, -math.pi / 2),),
            ),
            1.0,
        )
        traj = simulate(sys, sig, (0.0, 0.0, 0.0), 1.0, step=1e-3)
        want = -c1 * c2**2 / (4 * math.pi**2)
        assert traj.states[-1][2] == pytest.approx(want, abs=1e-9)


def test_closed_form_holomorphic_square_pair():
    # f = (x1^2 - x2^2, 2 x1 x2) with the same inputs: x3(1) = c1^2 c2 / (2 pi^2)
    sys = General2D(field2("x1^2 - x2^2", "2*x1*x2"))
    c1, c2 = 2 * math.pi**2, 1.0
    sig = InputSignal(
        (
            (Sinusoid(0.0, 1.0, c1, 2 * math.pi, 0.0),),
            (Sinusoid(0.0, 1.0, c2, 2 * math.pi, -math.pi / 2),),
        ),
        1.0,
    )
    traj = simulate(sys, sig, (0.0, 0.0, 0.0), 1.0, step=1e-3)
    assert traj.states[-1][2] == pytest.approx(1.0, abs=1e-9)


def _naive_rk4(rhs, x0, T, n):
    # deliberately independent integrator for cross-checks
    h = T / n
    x = np.array(x0, dtype=float)
    t = 0.0
    for _ in range(n):
        k1 = rhs(t, x)
        k2 = rhs(t + h / 2, x + h / 2 * k1)
        k3 = rhs(t + h / 2, x + h / 2 * k2)
        k4 = rhs(t + h, x + h * k3)
        x = x + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        t += h
    return x


def test_simulate_matches_independent_rk4():
    sig = circle_signal(1.0, 0.8)
    sys = General2D(field2("x2^2", "-x1^2"))

    def rhs(t, x):
        u1 = sig.channel_value(0, min(t, 1.0))
        u2 = sig.channel_value(1, min(t, 1.0))
        return np.array([u1, u2, x[1] ** 2 * u1 - x[0] ** 2 * u2])

    traj = simulate(sys, sig, (0.1, -0.2, 0.0), 1.0, step=1e-3)
    ref = _naive_rk4(rhs, (0.1, -0.2, 0.0), 1.0, 1000)
    np.testing.assert_allclose(traj.states[-1], ref, atol=1e-12)


def test_base_coordinates_track_exact_integrals():
    # base rows follow the signal's running integrals to RK4 accuracy
    sig = circle_signal(1.3, -0.4)
    traj = simulate(Classic(), sig, (0.2, 0.5, 0.0), 1.0, step=1e-3)
    np.testing.assert_allclose(
        traj.states[:, 0], 0.2 + sig.channel_integral(0, traj.ts), atol=1e-9
    )
    np.testing.assert_allclose(
        traj.states[:, 1], 0.5 + sig.channel_integral(1, traj.ts), atol=1e-9
    )


def test_classic_area_law_polygon():
    # piecewise-constant inputs trace a triangle; the fiber accumulates
    # twice its signed area (shoelace oracle)
    verts = [(0.0, 0.0), (1.0, 0.0), (0.4, 0.8), (0.0, 0.0)]
    legs = list(zip(verts, verts[1:]))
    n = len(legs)
    ch1, ch2 = [], []
    for i, (a, b) in enumerate(legs):
        t0, t1 = i / n, (i + 1) / n
        ch1.append(Constant(t0, t1, (b[0] - a[0]) * n))
        ch2.append(Constant(t0, t1, (b[1] - a[1]) * n))
    sig = InputSignal((tuple(ch1), tuple(ch2)), 1.0)
    shoelace = 0.0
    for a, b in legs:
        shoelace += a[0] * b[1] - b[0] * a[1]
    traj = simulate(Classic(), sig, (0.0, 0.0, 0.0), 1.0, step=1e-3)
    assert traj.states[-1][2] == pytest.approx(shoelace, abs=1e-10)
    assert traj.states[-1][0] == pytest.approx(0.0, abs=1e-12)
    assert traj.states[-1][1] == pytest.approx(0.0, abs=1e-12)


def test_classic_circle_area():
    # unit-rate circle of radius r: enclosed area pi r^2, fiber 2 pi r^2
    traj = simulate(Classic(), circle_signal(2 * math.pi, 2 * math.pi), (1.0, 0.0, 0.0), 1.0, step=1e-3)
    assert traj.states[-1][2] == pytest.approx(2 * math.pi, abs=1e-8)


def test_dual_route_general2d():
    sys = General2D(field2("x1*x2", "x1 - x2^3"))
    sig = circle_signal(0.9, 1.4)
    x0 = (0.3, -0.1, 0.2)
    traj = simulate(sys, sig, x0, 1.0, step=1e-3)
    gain = fiber_displacement(sys, sig, x0, 1.0)
    assert traj.states[-1][2] - x0[2] == pytest.approx(gain, abs=1e-9)


def test_dual_route_general3d_and_drift():
    f3 = VectorField((parse("x2*x3"), parse("-x1"), parse("x1*x2")))
    sig = InputSignal(
        (
            (Sinusoid(0.0, 1.0, 1.0, 2 * math.pi, 0.0),),
            (Sinusoid(0.0, 1.0, 1.0, 2 * math.pi, -math.pi / 2),),
            (Constant(0.0, 1.0, 0.5),),
        ),
        1.0,
    )
    x0 = (0.1, 0.0, -0.2, 0.0)
    traj = simulate(General3D(f3), sig, x0, 1.0, step=1e-3)
    gain = fiber_displacement(General3D(f3), sig, x0, 1.0)
    assert traj.states[-1][3] - x0[3] == pytest.approx(gain, abs=1e-9)

    drift = Drift3D(f3, parse("x1^2 + 1"))
    traj_d = simulate(drift, sig, x0, 1.0, step=1e-3)
    gain_d = fiber_displacement(drift, sig, x0, 1.0)
    assert traj_d.states[-1][3] - x0[3] == pytest.approx(gain_d, abs=1e-9)
    # drift strictly increases the fiber here (integrand >= 1)
    assert gain_d > gain + 0.9


def test_dual_route_complex_plane():
    sys = ComplexPlane(*conjugate_power(2))
    sig = circle_signal(1.1, 0.7)
    x0 = (0.4, 0.2, 0.0, 0.0)
    traj = simulate(sys, sig, x0, 1.0, step=1e-3)
    gain = fiber_displacement(sys, sig, x0, 1.0)
    assert traj.states[-1][2] - x0[2] == pytest.approx(gain[0], abs=1e-9)
    assert traj.states[-1][3] - x0[3] == pytest.approx(gain[1], abs=1e-9)


def test_complex_plane_rates_match_complex_product():
    # dw/dt = F(z) (u1 + i u2) with F = conj(z)^2, checked at one step
    sys = ComplexPlane(*conjugate_power(2))
    u = (0.8, -0.3)
    x0 = (0.5, 0.7, 0.0, 0.0)
    h = 1e-6
    sig = constant_signal(u, h)
    traj = simulate(sys, sig, x0, h, step=h)
    rate = (np.array(traj.states[-1][2:]) - np.array(x0[2:])) / h
    want = complex(x0[0], -x0[1]) ** 2 * complex(*u)
    assert rate[0] == pytest.approx(want.real, abs=1e-5)
    assert rate[1] == pytest.approx(want.imag, abs=1e-5)


def test_area_pairs_matches_classic():
    # m = 2 area form is the classic fiber up to state layout
    sig = circle_signal(1.0, 1.0)
    x0 = (0.3, -0.2)
    tc = simulate(Classic(), sig, (*x0, 0.0), 1.0, step=1e-3)
    ta = simulate(AreaPairs(2), sig, (*x0, 0.0), 1.0, step=1e-3)
    np.testing.assert_allclose(ta.states[-1], tc.states[-1], atol=1e-12)


def test_area_pairs_m3_layout():
    sig = InputSignal(
        (
            (Sinusoid(0.0, 1.0, 1.0, 2 * math.pi, 0.0),),
            (Sinusoid(0.0, 1.0, 1.0, 2 * math.pi, -math.pi / 2),),
            (Constant(0.0, 1.0, 0.0),),
        ),
        1.0,
    )
    x0 = (0.0,) * 6
    traj = simulate(AreaPairs(3), sig, x0, 1.0, step=1e-3)
    end = traj.states[-1]
    # only the (1,2) fiber moves; channel 3 is silent and starts at 0
    assert end[3] == pytest.approx(2 * math.pi * (1 / (2 * math.pi)) ** 2, abs=1e-8)
    assert end[4] == pytest.approx(0.0, abs=1e-12)
    assert end[5] == pytest.approx(0.0, abs=1e-12)


def test_field_pairs_from_dict_and_order():
    pairs = {
        (1, 2): field2("-x2", "x1"),
        (1, 3): field2("x2^2", "-x1^2"),
        (2, 3): field2("1", "0"),
    }
    sys = FieldPairs.from_dict(3, pairs)
    assert [k for k, _ in sys.pairs] == pair_order(3)
    with pytest.raises(ValueError, match="order"):
        FieldPairs(3, tuple(reversed(sys.pairs)))
    sig = InputSignal(
        (
            (Sinusoid(0.0, 1.0, 1.0, 2 * math.pi, 0.0),),
            (Sinusoid(0.0, 1.0, 1.0, 2 * math.pi, -math.pi / 2),),
            (Constant(0.0, 1.0, 0.0),),
        ),
        1.0,
    )
    traj = simulate(sys, sig, (0.0,) * 6, 1.0, step=1e-3)
    gains = fiber_displacement(sys, sig, (0.0,) * 6, 1.0)
    ordered = [gains[k] for k in pair_order(3)]
    np.testing.assert_allclose(traj.states[-1][3:], ordered, atol=1e-9)


def test_simulate_splits_steps_at_piece_boundaries():
    # boundary at t = 0.35 does not align with step 0.1; the endpoint must
    # still match a fine reference because steps split internally
    ch = (
        (Constant(0.0, 0.35, 1.0), Constant(0.35, 1.0, -0.5)),
        (Sinusoid(0.0, 1.0, 1.0, 3.0, 0.2),),
    )
    sig = InputSignal(ch, 1.0)
    sys = General2D(field2("x2^2", "-x1^2"))
    coarse = simulate(sys, sig, (0.0, 0.0, 0.0), 1.0, step=0.1)
    fine = simulate(sys, sig, (0.0, 0.0, 0.0), 1.0, step=1e-4)
    # smooth truncation error at h = 0.1 is ~3e-7; an unsplit step across
    # the jump would contribute ~ h |du| / 6 = 2.5e-2
    np.testing.assert_allclose(coarse.states[-1], fine.states[-1], atol=1e-5)


def test_rk4_convergence_order():
    sig = circle_signal(1.0, 0.7)
    sys = General2D(field2("sin(x1) + x2^2", "exp(x2) - x1"))
    x0 = (0.1, 0.2, 0.0)
    ref = simulate(sys, sig, x0, 1.0, step=1 / 2560).states[-1]
    e1 = np.max(np.abs(simulate(sys, sig, x0, 1.0, step=1 / 40).states[-1] - ref))
    e2 = np.max(np.abs(simulate(sys, sig, x0, 1.0, step=1 / 80).states[-1] - ref))
    assert e1 / e2 >= 12.0


def test_resolve_steps():
    assert resolve_steps(1.0, 0.25) == 4
    assert resolve_steps(2.0, 0.1) == 20
    with pytest.raises(ValueError, match="divide"):
        resolve_steps(1.0, 0.3)
    with pytest.raises(ValueError):
        resolve_steps(1.0, -0.1)


def test_simulate_validates_shapes():
    sig = circle_signal(1.0, 1.0)
    with pytest.raises(ValueError):
        simulate(Classic(), sig, (0.0, 0.0), 1.0, step=0.1)  # short state
    bad = InputSignal(((Constant(0.0, 1.0, 1.0),),), 1.0)
    with pytest.raises(ValueError):
        simulate(Classic(), bad, (0.0, 0.0, 0.0), 1.0, step=0.1)  # one channel
    with pytest.raises(ValueError):
        simulate(Classic(), sig, (0.0, 0.0, 0.0), 2.0, step=0.1)  # T != duration


def test_guard_trips_during_simulation():
    f = field2("-x2/(x1^2+x2^2)", "x1/(x1^2+x2^2)", excluded=((0.0, 0.0),))
    sig = constant_signal([1.0, 0.0], 1.0)  # drives straight through origin
    with pytest.raises(ExcludedSetError):
        simulate(General2D(f), sig, (-0.5, 0.0, 0.0), 1.0, step=1e-3)


def test_complex_pole_guard():
    sys = ComplexPlane(*conjugate_power(1), poles=((0.5, 0.0),))
    sig = constant_signal([1.0, 0.0], 1.0)
    with pytest.raises(ExcludedSetError):
        simulate(sys, sig, (0.0, 0.0, 0.0, 0.0), 1.0, step=1e-3)


def test_trajectory_csv():
    sig = circle_signal(1.0, 1.0)
    traj = simulate(Classic(), sig, (0.0, 0.0, 0.0), 1.0, step=0.5)
    text = trajectory_csv(traj)
    lines = text.strip().split("\n")
    assert lines[0] == "t,x1,x2,x3"
    assert len(lines) == 4  # header + 3 grid points
    first = [float(v) for v in lines[1].split(",")]
    assert first == [0.0, 0.0, 0.0, 0.0]


def test_trajectory_grid():
    sig = circle_signal(1.0, 1.0)
    traj = simulate(Classic(), sig, (0.0, 0.0, 0.0), 1.0, step=0.25)
    np.testing.assert_allclose(traj.ts, [0.0, 0.25, 0.5, 0.75, 1.0], atol=1e-15)
    assert traj.states.shape == (5, 3)
