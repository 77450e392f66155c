#!/usr/bin/env python3
"""Run every steering planner on a matching task and verify by simulation.

Each row plans with quadrature-based construction, then re-simulates the
resulting input signal with the fixed-step integrator and reports the
endpoint error.  The two routes are independent, so small errors here
mean the planner closed forms are right, not just self-consistent.

Usage:
    python3 scripts/steering_showcase.py [--step H]
"""

import argparse
import math

from nonholo.expr import parse
from nonholo.fields import VectorField
from nonholo.steering import (
    plan_loop_scaling,
    plan_residue_chain,
    plan_sinusoid_classic,
    plan_two_phase,
    conjugate_system,
    plan_energy,
    verify_plan,
)
from nonholo.systems import Classic, General2D, General3D


def field2(f1, f2, **kw):
    return VectorField((parse(f1), parse(f2)), **kw)


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--step", type=float, default=1e-3, help="verification step")
    args = ap.parse_args()

    rot3 = General3D(VectorField((parse("-x2"), parse("x1"), parse("1"))))
    osc = General2D(field2("x2^2", "-x1^2"))

    tasks = [
        (
            "sinusoid, fiber +2",
            Classic(),
            plan_sinusoid_classic(2.0),
            (0.0, 0.0, 0.0),
        ),
        (
            "loop scaling, fiber +1.5",
            Classic(),
            plan_loop_scaling(Classic(), 1.5),
            (0.0, 0.0, 0.0),
        ),
        (
            "loop scaling, position-dependent field",
            osc,
            plan_loop_scaling(osc, 0.05, x0=(0.5, 0.5, 0.0)),
            (0.5, 0.5, 0.0),
        ),
        (
            "two-phase, base + fiber",
            Classic(),
            plan_two_phase(Classic(), (1.0, -1.0, 0.5), (-0.3, 0.7, 2.0)),
            (1.0, -1.0, 0.5),
        ),
        (
            "two-phase, spatial",
            rot3,
            plan_two_phase(rot3, (0.0,) * 4, (0.5, -0.2, 0.3, 1.2)),
            (0.0,) * 4,
        ),
        (
            "residue chain n=2, fiber (4pi, 4pi)",
            conjugate_system(2),
            plan_residue_chain(2, 4 * math.pi, 4 * math.pi),
            (0.0,) * 4,
        ),
    ]

    print(f"{'task':42s} {'method':18s} {'T':>5s} {'energy':>10s} {'endpoint err':>12s}")
    print("-" * 93)
    for name, sys_model, plan, x0 in tasks:
        res = verify_plan(sys_model, plan, x0, step=args.step)
        flag = "" if res["ok"] else "  << MISMATCH"
        print(
            f"{name:42s} {plan.method:18s} {plan.duration:5.2f} "
            f"{plan_energy(plan):10.4f} {res['max_error']:12.3e}{flag}"
        )
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
