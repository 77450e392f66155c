"""Controllability tests built on circulation.

A fiber direction is steerable exactly when some closed base loop picks up
a nonzero line integral of its field.  For planar and spatial fields that
is probed two ways: pointwise curl evaluation (a nonzero curl at any point
yields a small loop with nonzero circulation) and direct loop integrals.
For the complex-plane system the probes are contour integrals of F dz,
whose real and imaginary parts must span the fiber plane.

Verdict semantics:

- ``controllable``: some probe is nonzero beyond tolerance; the witness
  records where.
- ``uncontrollable``: every probe supporting the verdict is below
  tolerance AND either a symbolic zero-curl certificate exists, or the
  zero circulation is structural (declared excluded set with vanishing
  loop integrals around it; holomorphic complex rate).
- ``inconclusive``: probes vanish numerically but no certificate exists.

The curl criterion is read existentially (nonzero somewhere suffices);
every report carries a caveat line saying so.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from typing import Optional, Sequence

import numpy as np

from . import expr as ex
from .fields import (
    GUARD_RADIUS,
    ExcludedSetError,
    VectorField,
    cauchy_riemann_exprs,
    curl_expr,
    is_symbolically_zero,
)
from .quad import _GL_NODES, _GL_WEIGHTS, periodic_trapezoid
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
    _expand_area_pairs,
    pair_order,
)

__all__ = [
    "Loop",
    "StokesResult",
    "CurlScan",
    "HolomorphyResult",
    "ControllabilityReport",
    "loop_integral",
    "stokes_check",
    "curl_scan",
    "contour_integral",
    "holomorphy_test",
    "classify",
    "report_to_dict",
]

ZERO_TOL = 1e-8

_EXISTENTIAL_NOTE = (
    "curl criterion read existentially: a nonzero value at any probed point "
    "counts as circulation"
)


@dataclass(frozen=True)
class Loop:
    """A circle traversed once over the unit parameter interval.

    ``plane`` gives the two axis indices (0-based) spanning the circle;
    ``orientation`` +1 runs counterclockwise in that plane, -1 clockwise.
    """

    center: tuple[float, ...]
    radius: float
    orientation: int = 1
    plane: tuple[int, int] = (0, 1)

    def __post_init__(self) -> None:
        object.__setattr__(self, "center", tuple(float(c) for c in self.center))
        if self.radius <= 0:
            raise ValueError("radius must be positive")
        if self.orientation not in (1, -1):
            raise ValueError("orientation must be +1 or -1")
        a, b = self.plane
        dim = len(self.center)
        if not (0 <= a < dim and 0 <= b < dim and a != b):
            raise ValueError(f"plane {self.plane} invalid for dimension {dim}")

    @property
    def dim(self) -> int:
        return len(self.center)

    def points(self, s: np.ndarray) -> list[np.ndarray]:
        """Coordinates along the loop at parameters ``s`` in [0, 1)."""
        ang = 2.0 * np.pi * np.asarray(s, dtype=float)
        a, b = self.plane
        coords = [np.full_like(ang, c) for c in self.center]
        coords[a] = coords[a] + self.radius * np.cos(ang)
        coords[b] = coords[b] + self.orientation * self.radius * np.sin(ang)
        return coords

    def tangents(self, s: np.ndarray) -> list[np.ndarray]:
        """d(point)/ds along the loop."""
        ang = 2.0 * np.pi * np.asarray(s, dtype=float)
        a, b = self.plane
        coords = [np.zeros_like(ang) for _ in self.center]
        coords[a] = -2.0 * np.pi * self.radius * np.sin(ang)
        coords[b] = self.orientation * 2.0 * np.pi * self.radius * np.cos(ang)
        return coords

    def distance_to(self, point: Sequence[float]) -> float:
        """Euclidean distance from ``point`` to the circle (as a set)."""
        a, b = self.plane
        d = [p - c for p, c in zip(point, self.center)]
        in_plane = np.hypot(d[a], d[b])
        off = sum(v * v for k, v in enumerate(d) if k not in (a, b))
        return float(np.hypot(in_plane - self.radius, np.sqrt(off)))


def _guard_loop(loop: Loop, excluded: Sequence[Sequence[float]]) -> None:
    for p in excluded:
        if loop.distance_to(p) < GUARD_RADIUS:
            raise ExcludedSetError(
                f"loop contour passes within the guard radius of excluded point {tuple(p)}"
            )


def loop_integral(f: VectorField, loop: Loop, tol: float = 1e-10) -> float:
    """The circulation of ``f`` around ``loop`` by the periodic trapezoid rule.

    Starts at 256 points and doubles until the change is below ``tol``
    (smooth closed-loop integrands converge spectrally, so this is a
    faithful error estimate) or 65536 points.
    """
    if f.dim != loop.dim:
        raise ValueError("field and loop dimensions differ")
    _guard_loop(loop, f.excluded)

    def g(s: np.ndarray) -> np.ndarray:
        xs = loop.points(s)
        ts = loop.tangents(s)
        comps = f(xs)
        return sum(c * t for c, t in zip(comps, ts)) + np.zeros_like(s)

    return periodic_trapezoid(g, 1.0, tol=tol)


class StokesResult(tuple):
    """(line, surface) pair with a non-simply-connected flag attached."""

    def __new__(cls, line: float, surface: float, caveat: bool):
        obj = super().__new__(cls, (line, surface))
        obj.caveat = caveat
        return obj

    @property
    def line(self) -> float:
        return self[0]

    @property
    def surface(self) -> float:
        return self[1]


def _plane_normal_sign(plane: tuple[int, int], dim: int) -> tuple[int, int]:
    """(normal axis, sign) such that e_a x e_b = sign * e_axis (3D)."""
    a, b = plane
    axis = 3 - a - b
    cyclic = {(0, 1), (1, 2), (2, 0)}
    return axis, 1 if (a, b) in cyclic else -1


def stokes_check(f: VectorField, loop: Loop) -> StokesResult:
    """Line integral around the loop and curl flux through the flat disk.

    For a field with no excluded set inside the disk the two agree; an
    excluded point inside the disk breaks the theorem's hypothesis, so the
    pair is still returned but flagged.
    """
    line = loop_integral(f, loop)
    a, b = loop.plane
    if f.dim == 2:
        integrand = curl_expr(f)
        sign = loop.orientation
    else:
        axis, s = _plane_normal_sign(loop.plane, 3)
        integrand = curl_expr(f)[axis]
        sign = loop.orientation * s

    caveat = False
    for p in f.excluded:
        d = [pc - cc for pc, cc in zip(p, loop.center)]
        in_plane = float(np.hypot(d[a], d[b]))
        off = np.sqrt(sum(v * v for k, v in enumerate(d) if k not in (a, b)))
        if in_plane < loop.radius - GUARD_RADIUS and off < GUARD_RADIUS:
            caveat = True

    def surface_at(n_ang: int, n_rad: int) -> float:
        theta = np.linspace(0.0, 2.0 * np.pi, n_ang, endpoint=False)
        edges = np.linspace(0.0, loop.radius, n_rad + 1)
        half = 0.5 * (edges[1:] - edges[:-1])
        mid = 0.5 * (edges[1:] + edges[:-1])
        r = (mid[:, None] + half[:, None] * _GL_NODES[None, :]).reshape(-1)
        w = (half[:, None] * _GL_WEIGHTS[None, :]).reshape(-1)
        rr = r[:, None]
        tt = theta[None, :]
        coords = [np.full((r.size, n_ang), c) for c in loop.center]
        coords[a] = coords[a] + rr * np.cos(tt)
        coords[b] = coords[b] + loop.orientation * rr * np.sin(tt)
        vals = ex.evaluate(integrand, coords)
        vals = np.asarray(vals, dtype=float) + np.zeros((r.size, n_ang))
        vals = np.where(np.isfinite(vals), vals, 0.0)
        ang_mean = vals.mean(axis=1) * 2.0 * np.pi
        return float(np.sum(w * r * ang_mean))

    n_ang, n_rad = 256, 8
    prev = surface_at(n_ang, n_rad)
    for _ in range(5):
        n_ang *= 2
        n_rad *= 2
        cur = surface_at(n_ang, n_rad)
        if abs(cur - prev) <= max(1e-10, 1e-9 * abs(cur)):
            prev = cur
            break
        prev = cur
    return StokesResult(line, sign * prev, caveat)


@dataclass(frozen=True)
class CurlScan:
    max_abs: float
    argmax: tuple[float, ...]
    skipped: int
    grid: int


def _grid_points(box: Sequence[tuple[float, float]], grid: int) -> list[np.ndarray]:
    axes = [np.linspace(lo, hi, grid) for lo, hi in box]
    mesh = np.meshgrid(*axes, indexing="ij")
    return [m.reshape(-1) for m in mesh]


def curl_scan(
    f: VectorField,
    box: Optional[Sequence[tuple[float, float]]] = None,
    grid: int = 33,
) -> CurlScan:
    """Max |curl| over a uniform grid; excluded/singular points are skipped."""
    if box is None:
        box = [(-2.0, 2.0)] * f.dim
    if len(box) != f.dim:
        raise ValueError("box dimension differs from field dimension")
    coords = _grid_points(box, grid)
    c = curl_expr(f)
    if f.dim == 2:
        vals = np.abs(np.asarray(ex.evaluate(c, coords), dtype=float) + np.zeros_like(coords[0]))
    else:
        comps = [
            np.asarray(ex.evaluate(ci, coords), dtype=float) + np.zeros_like(coords[0])
            for ci in c
        ]
        vals = np.sqrt(sum(v * v for v in comps))
    mask = np.isfinite(vals)
    for p in f.excluded:
        d2 = sum((coord - pc) ** 2 for coord, pc in zip(coords, p))
        mask &= d2 > (1e-6) ** 2
    skipped = int(np.size(vals) - np.count_nonzero(mask))
    if not np.any(mask):
        return CurlScan(0.0, tuple(float(c[0]) for c in coords), skipped, grid)
    masked = np.where(mask, vals, -np.inf)
    idx = int(np.argmax(masked))
    return CurlScan(
        float(vals[idx]),
        tuple(float(coord[idx]) for coord in coords),
        skipped,
        grid,
    )


def contour_integral(
    F: Sequence[ex.ScalarExpr],
    loop: Loop,
    poles: Sequence[tuple[float, float]] = (),
    tol: float = 1e-10,
) -> complex:
    """The complex integral of (F1 + i F2) dz around a planar loop."""
    if loop.dim != 2:
        raise ValueError("contour integrals live in the plane")
    F1, F2 = F
    for p in poles:
        if loop.distance_to(p) < GUARD_RADIUS:
            raise ExcludedSetError(
                f"contour passes within the guard radius of pole {tuple(p)}"
            )

    def real_part(s: np.ndarray) -> np.ndarray:
        xs = loop.points(s)
        dx, dy = loop.tangents(s)
        v1 = ex.evaluate(F1, xs)
        v2 = ex.evaluate(F2, xs)
        return v1 * dx - v2 * dy + np.zeros_like(s)

    def imag_part(s: np.ndarray) -> np.ndarray:
        xs = loop.points(s)
        dx, dy = loop.tangents(s)
        v1 = ex.evaluate(F1, xs)
        v2 = ex.evaluate(F2, xs)
        return v1 * dy + v2 * dx + np.zeros_like(s)

    return complex(
        periodic_trapezoid(real_part, 1.0, tol=tol),
        periodic_trapezoid(imag_part, 1.0, tol=tol),
    )


@dataclass(frozen=True)
class HolomorphyResult:
    holomorphic: bool
    max_residual: float
    witness: Optional[tuple[float, float]]
    skipped: int


def holomorphy_test(
    F: Sequence[ex.ScalarExpr],
    box: Optional[Sequence[tuple[float, float]]] = None,
    grid: int = 33,
    poles: Sequence[tuple[float, float]] = (),
    tol: float = ZERO_TOL,
) -> HolomorphyResult:
    """Max Cauchy-Riemann residual of F = F1 + i F2 over a grid."""
    if box is None:
        box = [(-2.0, 2.0)] * 2
    r1, r2 = cauchy_riemann_exprs(F[0], F[1])
    coords = _grid_points(box, grid)
    v1 = np.asarray(ex.evaluate(r1, coords), dtype=float) + np.zeros_like(coords[0])
    v2 = np.asarray(ex.evaluate(r2, coords), dtype=float) + np.zeros_like(coords[0])
    vals = np.hypot(v1, v2)
    mask = np.isfinite(vals)
    for p in poles:
        d2 = (coords[0] - p[0]) ** 2 + (coords[1] - p[1]) ** 2
        mask &= d2 > (1e-6) ** 2
    skipped = int(np.size(vals) - np.count_nonzero(mask))
    if not np.any(mask):
        return HolomorphyResult(True, 0.0, None, skipped)
    masked = np.where(mask, vals, -np.inf)
    idx = int(np.argmax(masked))
    max_res = float(vals[idx])
    witness = (float(coords[0][idx]), float(coords[1][idx])) if max_res > tol else None
    return HolomorphyResult(max_res <= tol, max_res, witness, skipped)


@dataclass
class ControllabilityReport:
    verdict: str  # "controllable" | "uncontrollable" | "inconclusive"
    witness: Optional[dict]
    caveats: list[str] = dc_field(default_factory=list)
    evidence: list[dict] = dc_field(default_factory=list)


def report_to_dict(report: ControllabilityReport) -> dict:
    """Stable key order for serialization."""
    return {
        "verdict": report.verdict,
        "witness": report.witness,
        "caveats": list(report.caveats),
        "evidence": list(report.evidence),
    }


def _loop_dict(loop: Loop, value: float) -> dict:
    return {
        "kind": "loop",
        "center": list(loop.center),
        "radius": loop.radius,
        "orientation": loop.orientation,
        "plane": list(loop.plane),
        "value": value,
    }


def _planar_loop_candidates(
    box: Sequence[tuple[float, float]],
    radii: Sequence[float],
    excluded: Sequence[Sequence[float]],
    dim: int,
    rng: Optional[np.random.Generator],
    jitter: float,
) -> list[Loop]:
    """Deterministic probe loops: around excluded points first, then a coarse
    grid sweep, in every coordinate plane for spatial fields."""
    planes = [(0, 1)] if dim == 2 else [(0, 1), (0, 2), (1, 2)]
    centers: list[tuple[float, ...]] = [tuple(p) for p in excluded]
    for stride in (8, 4, 2):
        axes = [np.linspace(lo, hi, 33)[::stride] for lo, hi in box]
        mesh = np.meshgrid(*axes, indexing="ij")
        pts = np.stack([m.reshape(-1) for m in mesh], axis=1)
        for row in pts:
            c = tuple(float(v) for v in row)
            if c not in centers:
                centers.append(c)
    loops = []
    for c in centers:
        for r in radii:
            for plane in planes:
                cc = c
                if rng is not None and jitter > 0:
                    cc = tuple(v + rng.uniform(-jitter, jitter) for v in c)
                loops.append(Loop(cc, r, 1, plane))
    return loops


def _classify_field(
    f: VectorField,
    box: Optional[Sequence[tuple[float, float]]],
    grid: int,
    radii: Sequence[float],
    probe_budget: int,
    tol: float,
    rng: Optional[np.random.Generator],
    jitter: float,
) -> ControllabilityReport:
    if box is None:
        box = [(-2.0, 2.0)] * f.dim
    scan = curl_scan(f, box, grid)
    evidence: list[dict] = [
        {
            "kind": "curl-scan",
            "box": [list(b) for b in box],
            "grid": grid,
            "max_abs": scan.max_abs,
            "at": list(scan.argmax),
            "skipped": scan.skipped,
        }
    ]
    caveats: list[str] = []
    if f.excluded:
        caveats.append(
            "excluded set declared"
            + (f": {f.note}" if f.note else "")
            + "; probes keep the guard distance"
        )

    if scan.max_abs > tol:
        witness = None
        planes = [(0, 1)] if f.dim == 2 else [(0, 1), (0, 2), (1, 2)]
        for r in sorted(radii, reverse=True):
            for plane in planes:
                loop = Loop(scan.argmax, r, 1, plane)
                try:
                    val = loop_integral(f, loop)
                except ExcludedSetError:
                    continue
                if abs(val) > tol:
                    witness = _loop_dict(loop, val)
                    evidence.append(_loop_dict(loop, val))
                    break
            if witness is not None:
                break
        if witness is None:
            witness = {
                "kind": "point",
                "point": list(scan.argmax),
                "curl": scan.max_abs,
            }
        caveats.append(_EXISTENTIAL_NOTE)
        return ControllabilityReport("controllable", witness, caveats, evidence)

    # Curl vanished at every probed point; fall back to loop integrals.
    loops = _planar_loop_candidates(box, radii, f.excluded, f.dim, rng, jitter)
    probed = 0
    loop_rows: list[dict] = []
    for loop in loops:
        if probed >= probe_budget:
            break
        try:
            val = loop_integral(f, loop)
        except ExcludedSetError:
            continue
        probed += 1
        if len(loop_rows) < 12:
            loop_rows.append(_loop_dict(loop, val))
        if abs(val) > tol:
            evidence.append(_loop_dict(loop, val))
            caveats.append(_EXISTENTIAL_NOTE)
            return ControllabilityReport(
                "controllable", _loop_dict(loop, val), caveats, evidence
            )
    evidence.extend(loop_rows)
    evidence.append({"kind": "loop-probes", "count": probed, "max_abs": 0.0})

    caveats.append(_EXISTENTIAL_NOTE)
    if f.excluded:
        caveats.insert(
            0,
            "domain is not simply connected (excluded set); verdict rests on "
            "vanishing loop integrals around the exclusions",
        )
        return ControllabilityReport("uncontrollable", None, caveats, evidence)
    c = curl_expr(f)
    zero_cert = (
        is_symbolically_zero(c)
        if f.dim == 2
        else all(is_symbolically_zero(ci) for ci in c)
    )
    if zero_cert:
        caveats.insert(0, "symbolic certificate: curl simplifies to zero")
        return ControllabilityReport("uncontrollable", None, caveats, evidence)
    caveats.insert(
        0,
        "all probes below tolerance but no symbolic zero-curl certificate",
    )
    return ControllabilityReport("inconclusive", None, caveats, evidence)


def _classify_complex(
    sys: ComplexPlane,
    box: Optional[Sequence[tuple[float, float]]],
    grid: int,
    radii: Sequence[float],
    probe_budget: int,
    tol: float,
    rng: Optional[np.random.Generator],
    jitter: float,
) -> ControllabilityReport:
    if box is None:
        box = [(-2.0, 2.0)] * 2
    F = (sys.re, sys.im)
    caveats: list[str] = []
    evidence: list[dict] = []
    loops = _planar_loop_candidates(box, radii, sys.poles, 2, rng, jitter)
    values: list[tuple[Loop, complex]] = []
    probed = 0
    for loop in loops:
        if probed >= probe_budget:
            break
        try:
            v = contour_integral(F, loop, poles=sys.poles)
        except ExcludedSetError:
            continue
        probed += 1
        values.append((loop, v))
    vs = np.array([[v.real, v.imag] for _, v in values]) if values else np.zeros((0, 2))
    caveats.append(
        "loops traversed once (winding +-1); fiber reachability read from the "
        "span of probed contour integrals"
    )
    caveats.append(_EXISTENTIAL_NOTE)
    if vs.size:
        svals = np.linalg.svd(vs, compute_uv=False)
    else:
        svals = np.zeros(2)
    rank = int(np.sum(svals > tol))

    if rank == 2:
        # pick the pair with the largest wedge product as the witness
        best = None
        for i in range(len(values)):
            for j in range(i + 1, len(values)):
                w = abs(
                    values[i][1].real * values[j][1].imag
                    - values[i][1].imag * values[j][1].real
                )
                if best is None or w > best[0]:
                    best = (w, i, j)
        _, i, j = best
        for k in (i, j):
            loop, v = values[k]
            evidence.append(
                {
                    "kind": "contour",
                    "center": list(loop.center),
                    "radius": loop.radius,
                    "value_re": v.real,
                    "value_im": v.imag,
                }
            )
        witness = {
            "kind": "contour-pair",
            "first": evidence[-2],
            "second": evidence[-1],
        }
        return ControllabilityReport("controllable", witness, caveats, evidence)

    if rank == 1:
        # One steerable fiber direction; its orthogonal complement is dead.
        u, s, vt = np.linalg.svd(vs)
        live = vt[0]
        dead = vt[1]
        projections = vs @ dead
        order = np.argsort(-np.abs(projections))
        for k in order[:8]:
            loop, v = values[int(k)]
            evidence.append(
                {
                    "kind": "contour-projection",
                    "center": list(loop.center),
                    "radius": loop.radius,
                    "direction": [float(dead[0]), float(dead[1])],
                    "value": float(projections[int(k)]),
                }
            )
        caveats.insert(
            0,
            "probed contour integrals span only the fiber direction "
            f"({live[0]:.6g}, {live[1]:.6g}); the orthogonal fiber direction "
            "shows no circulation",
        )
        return ControllabilityReport("uncontrollable", None, caveats, evidence)

    # rank 0: every contour integral vanishes
    hol = holomorphy_test(F, box, grid, poles=sys.poles, tol=tol)
    evidence.append(
        {
            "kind": "contour-probes",
            "count": probed,
            "max_abs": float(np.max(np.abs(vs))) if vs.size else 0.0,
        }
    )
    evidence.append(
        {
            "kind": "holomorphy",
            "max_residual": hol.max_residual,
            "skipped": hol.skipped,
        }
    )
    r1, r2 = cauchy_riemann_exprs(sys.re, sys.im)
    symbolic = is_symbolically_zero(r1) and is_symbolically_zero(r2)
    if hol.holomorphic and symbolic:
        caveats.insert(
            0,
            "symbolic certificate: Cauchy-Riemann residuals simplify to zero; "
            "closed contour integrals of a holomorphic rate vanish",
        )
        return ControllabilityReport("uncontrollable", None, caveats, evidence)
    if hol.holomorphic and sys.poles:
        caveats.insert(
            0,
            "rate is holomorphic off the declared poles and every probed "
            "residue vanishes, so it has a single-valued antiderivative; "
            "domain is not simply connected",
        )
        return ControllabilityReport("uncontrollable", None, caveats, evidence)
    if hol.holomorphic:
        caveats.insert(
            0,
            "Cauchy-Riemann residuals vanish numerically but no symbolic "
            "certificate exists",
        )
        return ControllabilityReport("inconclusive", None, caveats, evidence)
    caveats.insert(
        0,
        "contour probes vanish yet the rate is not holomorphic on the box; "
        "probe set may be too coarse",
    )
    return ControllabilityReport("inconclusive", None, caveats, evidence)


def classify(
    sys: SystemModel,
    box: Optional[Sequence[tuple[float, float]]] = None,
    grid: int = 33,
    radii: Sequence[float] = (0.25, 0.5, 1.0),
    probe_budget: int = 200,
    tol: float = ZERO_TOL,
    seed: int = 0,
    jitter: float = 0.0,
) -> ControllabilityReport:
    """Classify fiber steerability of a system by circulation probes.

    Probes are deterministic for ``jitter = 0``; a positive jitter offsets
    loop centers using a generator seeded by ``seed``.
    """
    rng = np.random.default_rng(seed) if jitter > 0 else None
    if isinstance(sys, Classic):
        sys = as_general2d(sys)
    if isinstance(sys, General2D):
        return _classify_field(
            sys.field, box, grid, radii, probe_budget, tol, rng, jitter
        )
    if isinstance(sys, (General3D, Drift3D)):
        report = _classify_field(
            sys.field, box, grid, radii, probe_budget, tol, rng, jitter
        )
        if isinstance(sys, Drift3D):
            report.caveats.append(
                "drift term ignored: steerability depends on the controlled field only"
            )
        return report
    if isinstance(sys, AreaPairs):
        sys = _expand_area_pairs(sys)
    if isinstance(sys, FieldPairs):
        pairs = sys.pairs
        budget = max(1, probe_budget // max(1, len(pairs)))
        verdicts: dict[tuple[int, int], ControllabilityReport] = {}
        for (i, j), f in pairs:
            verdicts[(i, j)] = _classify_field(
                f, box, grid, radii, budget, tol, rng, jitter
            )
        evidence = [
            {"kind": "pair", "pair": [i, j], "verdict": rep.verdict}
            for (i, j), rep in verdicts.items()
        ]
        caveats = [
            "every pair fiber must be steerable for the joint system",
            _EXISTENTIAL_NOTE,
        ]
        if all(rep.verdict == "controllable" for rep in verdicts.values()):
            first = next(iter(verdicts.values()))
            return ControllabilityReport(
                "controllable", first.witness, caveats, evidence
            )
        if any(rep.verdict == "uncontrollable" for rep in verdicts.values()):
            bad = [k for k, rep in verdicts.items() if rep.verdict == "uncontrollable"]
            caveats.insert(0, f"pairs {bad} show no circulation")
            for k in bad:
                evidence.extend(verdicts[k].evidence)
            return ControllabilityReport("uncontrollable", None, caveats, evidence)
        return ControllabilityReport("inconclusive", None, caveats, evidence)
    if isinstance(sys, ComplexPlane):
        return _classify_complex(
            sys, box, grid, radii, probe_budget, tol, rng, jitter
        )
    raise TypeError(f"not a system model: {sys!r}")
