"""Command-line front end.

Four subcommands share one TOML config schema:

  nonholo analyze  --config sys.toml [--tol 1e-8] [--seed 0]
  nonholo steer    --config sys.toml [--to 0,0,1] [--T 1] [--method auto]
  nonholo optimal  --config sys.toml [--from 0,0,0] [--to 0,0,1] [--T 1]
  nonholo simulate --config sys.toml [--step 1e-3]

The config carries [system] (which model and which field expressions),
optional [task] defaults (from/to/T/method/signal pieces), and optional
[output] (dir/stem/format).  Flags win over config values.  Results are
written under --out, else [output].dir, else $NONHOLO_OUT, else the
working directory.  Exit status: 0 on success, 2 for invalid input or
config, 3 when a well-posed task fails (unreachable target, no
convergent branch, trajectory hitting an excluded point).
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path
from typing import Optional, Sequence

try:
    import tomllib
except ModuleNotFoundError:
    import tomli as tomllib

from . import controllability, optimal, steering
from .expr import ParseError, parse
from .fields import ExcludedSetError, VectorField, conjugate_power
from .serialize import dumps_canonical
from .signals import Constant, InputSignal, Polynomial, Sinusoid
from .systems import (
    AreaPairs,
    Classic,
    ComplexPlane,
    Drift3D,
    FieldPairs,
    General2D,
    General3D,
    SystemModel,
    as_general2d,
    base_dim,
    fiber_displacement,
    input_dim,
    pair_order,
    simulate,
    state_dim,
    trajectory_csv,
)

__all__ = ["main"]


class CliError(ValueError):
    """Invalid arguments or config (exit status 2)."""


def _load_config(path: Optional[str]) -> dict:
    if path is None:
        return {}
    p = Path(path)
    if not p.exists():
        raise CliError(f"config file not found: {path}")
    try:
        with open(p, "rb") as fh:
            return tomllib.load(fh)
    except tomllib.TOMLDecodeError as err:
        raise CliError(f"config is not valid TOML: {err}") from err


def _parse_expr(text: str, what: str):
    try:
        return parse(text)
    except ParseError as err:
        raise CliError(f"bad expression for {what}: {err}") from err


def _excluded(section: dict) -> tuple:
    pts = section.get("excluded", [])
    return tuple(tuple(float(v) for v in p) for p in pts)


def build_system(section: dict) -> SystemModel:
    """Construct a system model from a [system] config table."""
    kind = section.get("kind", "classic")
    if kind == "classic":
        return Classic()
    if kind == "general2d":
        comps = tuple(
            _parse_expr(section[k], f"system.{k}") for k in ("f1", "f2")
        )
        return General2D(
            VectorField(comps, _excluded(section), section.get("note", ""))
        )
    if kind == "general3d":
        comps = tuple(
            _parse_expr(section[k], f"system.{k}") for k in ("f1", "f2", "f3")
        )
        return General3D(
            VectorField(comps, _excluded(section), section.get("note", ""))
        )
    if kind == "drift3d":
        comps = tuple(
            _parse_expr(section[k], f"system.{k}") for k in ("f1", "f2", "f3")
        )
        drift = _parse_expr(section.get("drift", "0"), "system.drift")
        return Drift3D(
            VectorField(comps, _excluded(section), section.get("note", "")),
            drift,
        )
    if kind == "area-pairs":
        return AreaPairs(int(section.get("m", 2)))
    if kind == "field-pairs":
        m = int(section.get("m", 2))
        given = {}
        for entry in section.get("pairs", []):
            i, j = int(entry["i"]), int(entry["j"])
            comps = (
                _parse_expr(entry["f1"], f"pair ({i},{j}) f1"),
                _parse_expr(entry["f2"], f"pair ({i},{j}) f2"),
            )
            given[(i, j)] = VectorField(comps, note=entry.get("note", ""))
        missing = [p for p in pair_order(m) if p not in given]
        if missing:
            raise CliError(f"field-pairs config missing pairs {missing}")
        return FieldPairs(m, tuple((p, given[p]) for p in pair_order(m)))
    if kind == "complex":
        poles = tuple(tuple(float(v) for v in p) for p in section.get("poles", []))
        if "conjugate_power" in section:
            n = int(section["conjugate_power"])
            re, im = conjugate_power(n)
            return ComplexPlane(re, im, poles, note=f"conjugate power {n}")
        re = _parse_expr(section["re"], "system.re")
        im = _parse_expr(section["im"], "system.im")
        return ComplexPlane(re, im, poles, note=section.get("note", ""))
    raise CliError(f"unknown system kind: {kind!r}")


def _floats(text: str, what: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip() != ""]
    except ValueError as err:
        raise CliError(f"bad {what}: expected comma-separated numbers") from err


def _state_arg(
    flag_value: Optional[str], task: dict, key: str, dim: int, default0: bool
) -> list[float]:
    if flag_value is not None:
        vals = _floats(flag_value, key)
    elif key in task:
        vals = [float(v) for v in task[key]]
    elif default0:
        vals = [0.0] * dim
    else:
        raise CliError(f"missing --{key} (or [task].{key} in config)")
    if len(vals) != dim:
        raise CliError(f"--{key} needs {dim} components, got {len(vals)}")
    return vals


def _out_dir(args, config: dict) -> Path:
    out = (
        args.out
        or config.get("output", {}).get("dir")
        or os.environ.get("NONHOLO_OUT")
        or "."
    )
    p = Path(out)
    p.mkdir(parents=True, exist_ok=True)
    return p


def _formats(args, config: dict, default: str) -> set[str]:
    fmt = args.format or config.get("output", {}).get("format") or default
    if fmt == "both":
        return {"json", "csv"}
    if fmt in ("json", "csv"):
        return {fmt}
    raise CliError(f"unknown format {fmt!r} (expected csv, json, or both)")


def _stem(args, config: dict, default: str) -> str:
    custom = config.get("output", {}).get("stem")
    return f"{custom}.{default}" if custom else default


def _write(path: Path, text: str) -> None:
    path.write_text(text)
    print(f"wrote {path}")


def _cmd_analyze(args, config: dict) -> int:
    sys_model = build_system(config.get("system", {}))
    task = config.get("task", {})
    box = task.get("box")
    if box is not None:
        box = [tuple(float(v) for v in b) for b in box]
    report = controllability.classify(
        sys_model,
        box=box,
        grid=int(task.get("grid", 33)),
        probe_budget=int(task.get("budget", 200)),
        tol=args.tol if args.tol is not None else 1e-8,
        seed=args.seed,
        jitter=float(task.get("jitter", 0.0)),
    )
    print(f"verdict: {report.verdict}")
    for line in report.caveats:
        print(f"  note: {line}")
    out = _out_dir(args, config)
    stem = _stem(args, config, "report")
    _write(out / f"{stem}.json", dumps_canonical(controllability.report_to_dict(report)))
    return 0


def _pick_method(sys_model: SystemModel, frm, to, requested: str) -> str:
    if requested != "auto":
        return requested
    if isinstance(sys_model, ComplexPlane):
        return "residue-chain"
    d = base_dim(sys_model)
    base_moves = any(abs(frm[k] - to[k]) > 1e-12 for k in range(d))
    if base_moves:
        return "two-phase"
    if isinstance(sys_model, Classic) and all(abs(v) <= 1e-12 for v in frm):
        return "sinusoid-classic"
    return "loop-scaling"


def _conjugate_power_of(sys_model: ComplexPlane) -> int:
    from .expr import is_zero_polynomial, sub

    for n in range(1, 8):
        re, im = conjugate_power(n)
        if is_zero_polynomial(sub(sys_model.re, re)) and is_zero_polynomial(
            sub(sys_model.im, im)
        ):
            return n
    raise CliError(
        "residue-chain steering needs a conjugate-power rate; "
        "set conjugate_power in the [system] table"
    )


def _cmd_steer(args, config: dict) -> int:
    sys_model = build_system(config.get("system", {}))
    task = config.get("task", {})
    n = state_dim(sys_model)
    frm = _state_arg(args.frm, task, "from", n, default0=True)
    to = _state_arg(args.to, task, "to", n, default0=False)
    T = args.T if args.T is not None else float(task.get("T", 1.0))
    method = _pick_method(sys_model, frm, to, args.method or task.get("method", "auto"))

    if method == "sinusoid-classic":
        if not isinstance(sys_model, Classic):
            raise CliError("sinusoid-classic steering is for the classic system")
        if any(abs(v) > 1e-12 for v in frm) or any(abs(v) > 1e-12 for v in to[:2]):
            raise CliError(
                "sinusoid-classic steering starts at the origin and moves only the fiber"
            )
        plan = steering.plan_sinusoid_classic(to[2], T)
    elif method == "loop-scaling":
        d = base_dim(sys_model)
        if any(abs(frm[k] - to[k]) > 1e-12 for k in range(d)):
            raise CliError("loop scaling keeps the base fixed; use two-phase")
        plan = steering.plan_loop_scaling(sys_model, to[d] - frm[d], T, frm)
    elif method == "two-phase":
        plan = steering.plan_two_phase(sys_model, frm, to, T)
    elif method == "residue-chain":
        if not isinstance(sys_model, ComplexPlane):
            raise CliError("residue-chain steering is for the complex-plane system")
        power = _conjugate_power_of(sys_model)
        if any(abs(v) > 1e-12 for v in frm):
            raise CliError("residue-chain steering starts at the origin")
        plan = steering.plan_residue_chain(power, to[2], to[3])
        if abs(plan.duration - T) > 1e-9 and (args.T is not None or "T" in task):
            print(f"note: residue chains fix the duration at {plan.duration}")
    else:
        raise CliError(f"unknown steering method {method!r}")

    check = steering.verify_plan(
        sys_model, plan, frm, step=args.step, tol=args.tol if args.tol else 1e-6
    )
    print(f"method: {plan.method}")
    print(f"predicted: {['%.9g' % v for v in plan.predicted_endpoint]}")
    print(f"simulated: {['%.9g' % v for v in check['endpoint']]}")
    print(f"max error: {check['max_error']:.3e} ({'ok' if check['ok'] else 'MISMATCH'})")

    out = _out_dir(args, config)
    stem = _stem(args, config, "plan")
    fmts = _formats(args, config, "json")
    if "json" in fmts:
        _write(out / f"{stem}.json", dumps_canonical(steering.plan_to_dict(plan)))
    if "csv" in fmts:
        sig = steering.to_signal(plan)
        traj = simulate(sys_model, sig, frm, sig.duration, args.step)
        _write(out / f"{stem}.csv", trajectory_csv(traj))
    return 0 if check["ok"] else 3


def _build_problem(sys_model: SystemModel, task: dict) -> optimal.ExtremalProblem:
    if isinstance(sys_model, Classic):
        sys_model = as_general2d(sys_model)
    if not isinstance(sys_model, General2D):
        raise CliError("optimal control runs on planar single-fiber systems")
    drift = task.get("drift")
    state_cost = task.get("state_cost")
    return optimal.ExtremalProblem(
        sys_model.field,
        drift=_parse_expr(drift, "task.drift") if drift else None,
        state_cost=_parse_expr(state_cost, "task.state_cost") if state_cost else None,
    )


def _cmd_optimal(args, config: dict) -> int:
    sys_model = build_system(config.get("system", {}))
    task = config.get("task", {})
    problem = _build_problem(sys_model, task)
    frm = _state_arg(args.frm, task, "from", 3, default0=True)
    to = _state_arg(args.to, task, "to", 3, default0=False)
    T = args.T if args.T is not None else float(task.get("T", 1.0))
    sols = optimal.shoot(
        problem,
        frm,
        to,
        T,
        step=args.step,
        branches=int(task.get("branches", 5)),
    )
    if not sols:
        print("no extremal branch converged", file=sys.stderr)
        return 3
    best = sols[0]
    print(
        f"best: lambda={best.lam:.12g} u0=({best.u0[0]:.12g}, {best.u0[1]:.12g}) "
        f"cost={best.cost:.12g} residual={best.residual:.3e}"
    )
    for s in sols[1:]:
        print(f"  branch {s.branch}: lambda={s.lam:.6g} cost={s.cost:.6g}")
    out = _out_dir(args, config)
    stem = _stem(args, config, "solution")
    fmts = _formats(args, config, "json")
    if "json" in fmts:
        _write(out / f"{stem}.json", dumps_canonical(optimal.solution_to_dict(best)))
    if "csv" in fmts:
        traj = optimal.integrate_extremal(
            problem, best.lam, frm, best.u0, T, args.step
        )
        _write(out / f"{stem}.csv", optimal.extremal_csv(traj))
    return 0


def _build_signal(task: dict, n_channels: int, T: float) -> InputSignal:
    entries = task.get("signal", [])
    if not entries:
        raise CliError("simulate needs [[task.signal]] pieces in the config")
    chans: dict[int, list] = {k: [] for k in range(n_channels)}
    for entry in entries:
        if "channel" not in entry:
            raise CliError("each [[task.signal]] entry needs a channel number")
        ch = int(entry["channel"]) - 1
        if ch not in chans:
            raise CliError(f"signal channel {ch + 1} out of range (1..{n_channels})")
        kind = entry.get("kind", "constant")
        t0 = float(entry.get("t0", 0.0))
        t1 = float(entry.get("t1", T))
        if kind == "constant":
            piece = Constant(t0, t1, float(entry.get("value", 0.0)))
        elif kind == "sinusoid":
            piece = Sinusoid(
                t0,
                t1,
                float(entry.get("amplitude", 1.0)),
                float(entry.get("omega", 0.0)),
                float(entry.get("phase", 0.0)),
            )
        elif kind == "polynomial":
            coeffs = tuple(float(c) for c in entry.get("coeffs", [0.0]))
            piece = Polynomial(t0, t1, coeffs)
        else:
            raise CliError(f"unknown signal piece kind {kind!r}")
        chans[ch].append(piece)
    for k in range(n_channels):
        if not chans[k]:
            chans[k].append(Constant(0.0, T, 0.0))
        chans[k].sort(key=lambda p: p.t0)
    try:
        return InputSignal(tuple(tuple(chans[k]) for k in range(n_channels)), T)
    except ValueError as err:
        raise CliError(f"bad signal: {err}") from err


def _cmd_simulate(args, config: dict) -> int:
    sys_model = build_system(config.get("system", {}))
    task = config.get("task", {})
    n = state_dim(sys_model)
    x0 = _state_arg(args.frm, task, "x0", n, default0=True)
    T = args.T if args.T is not None else float(task.get("T", 1.0))
    signal = _build_signal(task, input_dim(sys_model), T)
    traj = simulate(sys_model, signal, x0, T, args.step)
    end = traj.end
    print(f"endpoint: {['%.12g' % v for v in end]}")
    disp = fiber_displacement(sys_model, signal, x0, T)
    print(f"fiber displacement (quadrature): {disp}")
    out = _out_dir(args, config)
    stem = _stem(args, config, "trajectory")
    fmts = _formats(args, config, "csv")
    if "csv" in fmts:
        _write(out / f"{stem}.csv", trajectory_csv(traj))
    if "json" in fmts:
        summary = {
            "endpoint": [float(v) for v in end],
            "steps": len(traj.ts) - 1,
        }
        _write(out / f"{stem}.json", dumps_canonical(summary))
    return 0


def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="nonholo",
        description="controllability analysis, steering, and optimal control "
        "for fiber systems driven by base circulation",
    )
    sub = ap.add_subparsers(dest="command", required=True)
    for name, help_ in (
        ("analyze", "classify fiber steerability"),
        ("steer", "plan an open-loop input reaching a target state"),
        ("optimal", "shoot for a minimum-cost extremal"),
        ("simulate", "integrate a configured input signal"),
    ):
        p = sub.add_parser(name, help=help_)
        p.add_argument("--config", help="TOML config with [system]/[task]/[output]")
        p.add_argument("--from", dest="frm", help="start state, comma-separated")
        p.add_argument("--to", help="target state, comma-separated")
        p.add_argument("--T", type=float, help="time horizon")
        p.add_argument("--step", type=float, help="integration step")
        p.add_argument("--tol", type=float, help="tolerance for tests/verification")
        p.add_argument("--seed", type=int, default=0, help="seed for jittered probes")
        p.add_argument("--method", help="steering method (steer only)")
        p.add_argument("--out", help="output directory (else $NONHOLO_OUT)")
        p.add_argument("--format", choices=["csv", "json", "both"], help="file formats")
    return ap


_COMMANDS = {
    "analyze": _cmd_analyze,
    "steer": _cmd_steer,
    "optimal": _cmd_optimal,
    "simulate": _cmd_simulate,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = _parser().parse_args(argv)
    try:
        config = _load_config(args.config)
        return _COMMANDS[args.command](args, config)
    except (CliError, ParseError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    except (KeyError, TypeError, ValueError) as err:
        print(f"error: invalid input: {err}", file=sys.stderr)
        return 2
    except (steering.SteeringError, ExcludedSetError, RuntimeError) as err:
        print(f"error: task failed: {err}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
