#!/usr/bin/env python3
"""Classify a zoo of systems and tabulate the verdicts.

Runs the full verdict tree on a representative set of planar, spatial,
pair, and complex-rate systems, prints one line per system, and writes
each report as canonical JSON into the output directory.

Usage:
    python3 scripts/survey_controllability.py [--out DIR] [--seed N]
"""

import argparse
from pathlib import Path

from nonholo.controllability import classify, report_to_dict
from nonholo.expr import parse
from nonholo.fields import (
    VectorField,
    conjugate_power,
    gradient_field,
    holomorphic_power,
    reciprocal_pole,
)
from nonholo.serialize import dumps_canonical
from nonholo.systems import (
    AreaPairs,
    Classic,
    ComplexPlane,
    Drift3D,
    FieldPairs,
    General2D,
    General3D,
)


def field2(f1, f2, **kw):
    return VectorField((parse(f1), parse(f2)), **kw)


def build_zoo():
    vortex = field2(
        "-x2/(x1^2+x2^2)",
        "x1/(x1^2+x2^2)",
        excluded=((0.0, 0.0),),
        note="unit vortex",
    )
    radial = field2(
        "x1/(x1^2+x2^2)",
        "x2/(x1^2+x2^2)",
        excluded=((0.0, 0.0),),
        note="punctured radial",
    )
    mixed_pairs = FieldPairs.from_dict(
        3,
        {
            (1, 2): field2("-x2", "x1"),
            (1, 3): gradient_field(parse("x1*x2")),
            (2, 3): field2("x2^2", "-x1^2"),
        },
    )
    return [
        ("classic", Classic()),
        ("odd-square", General2D(field2("x2^2", "-x1^2"))),
        ("gradient x1*x2", General2D(gradient_field(parse("x1*x2")))),
        ("vortex", General2D(vortex)),
        ("punctured radial", General2D(radial)),
        ("spatial rotation", General3D(VectorField((parse("-x2"), parse("x1"), parse("0"))))),
        (
            "drifted rotation",
            Drift3D(VectorField((parse("-x2"), parse("x1"), parse("0"))), parse("x1^2")),
        ),
        ("area pairs m=3", AreaPairs(3)),
        ("mixed pairs", mixed_pairs),
        ("conjugate rate", ComplexPlane(*conjugate_power(1))),
        ("conjugate square rate", ComplexPlane(*conjugate_power(2))),
        ("holomorphic square rate", ComplexPlane(*holomorphic_power(2))),
        ("reciprocal rate", ComplexPlane(*reciprocal_pole(), poles=((0.0, 0.0),))),
    ]


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="survey_out", help="directory for JSON reports")
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    print(f"{'system':28s} {'verdict':16s} witness")
    print("-" * 70)
    for name, sys_model in build_zoo():
        rep = classify(sys_model, seed=args.seed)
        if rep.witness is None:
            witness = "-"
        elif rep.witness.get("kind") == "loop":
            witness = (
                f"loop r={rep.witness['radius']:g} at "
                f"{tuple(round(c, 3) for c in rep.witness['center'])} "
                f"value {rep.witness['value']:.6g}"
            )
        else:
            witness = rep.witness.get("kind", "?")
        print(f"{name:28s} {rep.verdict:16s} {witness}")
        stem = name.replace(" ", "_").replace("=", "")
        (out / f"{stem}.json").write_text(dumps_canonical(report_to_dict(rep)))
    print(f"\nreports written to {out}/")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
