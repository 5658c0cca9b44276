#!/usr/bin/env python3
"""Regenerate the packaged oracle fixtures.

The fixtures pin finite-difference oracle eigenvalues for a fixed set of
parameter draws; the test suite asserts the shooting solvers against them.
Deterministic (no RNG): rerunning this script reproduces the file except for
genuine numerical changes, which is the point of versioning it.

Usage: python3 scripts/generate_fixtures.py [out_path]
"""

import json
from pathlib import Path
import sys

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from knads.geometry import BlackHoleParams, find_horizons
from knads.operators import ModeContext
from knads import oracle
from knads.radial import default_r0

N_GRID = 4000

ANGULAR_DRAWS = [
    {
        "name": "sphere-k-half",
        "params": dict(m=1.0, a=0.0, q_e=0.0, q_m=0.0, l=1.0),
        "ctx": dict(mu=1.0, e=0.0, k=0.5, omega=0.0, gauge_b=0.0),
        "window": [-4.5, 4.5],
    },
    {
        "name": "rotating-slow",
        "params": dict(m=1.0, a=0.15, q_e=0.1, q_m=0.0, l=1.0),
        "ctx": dict(mu=0.6, e=0.2, k=0.5, omega=0.3, gauge_b=0.0),
        "window": [-6.0, 6.0],
    },
    {
        "name": "rotating-mid",
        "params": dict(m=1.0, a=0.25, q_e=0.2, q_m=0.0, l=1.0),
        "ctx": dict(mu=1.0, e=-0.3, k=-0.5, omega=-0.4, gauge_b=0.0),
        "window": [-6.0, 6.0],
    },
    {
        "name": "rotating-fast",
        "params": dict(m=1.2, a=0.45, q_e=0.15, q_m=0.0, l=1.0),
        "ctx": dict(mu=1.3, e=0.25, k=1.5, omega=0.8, gauge_b=0.0),
        "window": [-6.0, 6.0],
    },
    {
        "name": "rotating-higher-k",
        "params": dict(m=1.0, a=0.35, q_e=0.1, q_m=0.0, l=1.2),
        "ctx": dict(mu=0.8, e=0.1, k=-1.5, omega=0.5, gauge_b=0.0),
        "window": [-6.0, 6.0],
    },
    {
        # magnetic charge with integer Dirac d = q_m e / Xi = 1: the theta=0
        # exponent sits exactly on the |nu| = 1/2 limit-point boundary
        "name": "magnetic-d-one",
        "params": dict(m=1.0, a=0.2, q_e=0.0, q_m=0.5, l=1.0),
        "ctx": dict(mu=1.0, e=1.92, k=0.5, omega=0.2, gauge_b=0.0),
        "window": [-6.0, 6.0],
    },
]

RADIAL_DRAWS = [
    {
        "name": "radial-baseline",
        "params": dict(m=1.0, a=0.3, q_e=0.2, q_m=0.0, l=1.0),
        "ctx": dict(mu=1.0, e=0.1, k=0.5, omega=0.0, gauge_b=0.0),
        "lambda": 1.0,
        "r0": None,
        "window": [-5.0, 5.0],
    },
    {
        "name": "radial-small-l",
        "params": dict(m=1.2, a=0.15, q_e=0.0, q_m=0.0, l=0.8),
        "ctx": dict(mu=1.2, e=-0.3, k=-0.5, omega=0.0, gauge_b=0.0),
        "lambda": -0.7,
        "r0": None,
        "window": [-5.0, 5.0],
    },
    {
        "name": "radial-deep-cutoff",
        "params": dict(m=0.9, a=0.4, q_e=0.1, q_m=0.0, l=1.2),
        "ctx": dict(mu=0.9, e=0.2, k=1.5, omega=0.0, gauge_b=0.0),
        "lambda": 2.1,
        "r0": "r_plus+0.5",
        "window": [-5.0, 5.0],
    },
]


def main():
    out = {
        "version": 1,
        "grid_n": N_GRID,
        "angular": [],
        "radial": [],
    }
    for draw in ANGULAR_DRAWS:
        p = BlackHoleParams(**draw["params"])
        ctx = ModeContext(**draw["ctx"])
        op = oracle.discretize_angular(p, ctx, N_GRID)
        ev = op.eigenvalues_in_window(*draw["window"])
        out["angular"].append(
            {
                "name": draw["name"],
                "params": draw["params"],
                "ctx": draw["ctx"],
                "window": draw["window"],
                "N": N_GRID,
                "eigenvalues": [float(v) for v in ev],
            }
        )
        print(f"angular {draw['name']}: {len(ev)} eigenvalues")
    for draw in RADIAL_DRAWS:
        p = BlackHoleParams(**draw["params"])
        ctx = ModeContext(**draw["ctx"])
        if draw["r0"] is None:
            r0 = default_r0(p)
        else:
            r0 = find_horizons(p).r_plus + float(draw["r0"].split("+")[1])
        op = oracle.discretize_radial_confined(p, ctx, draw["lambda"], r0, N_GRID)
        ev = op.eigenvalues_in_window(*draw["window"])
        out["radial"].append(
            {
                "name": draw["name"],
                "params": draw["params"],
                "ctx": draw["ctx"],
                "lambda": draw["lambda"],
                "r0": float(r0),
                "r0_rule": draw["r0"] or "r_plus+l",
                "window": draw["window"],
                "N": N_GRID,
                "eigenvalues": [float(v) for v in ev],
            }
        )
        print(f"radial {draw['name']}: {len(ev)} eigenvalues")
    path = (
        Path(sys.argv[1])
        if len(sys.argv) > 1
        else Path(__file__).resolve().parents[1] / "src" / "knads" / "data" / "fixtures.json"
    )
    path.write_text(json.dumps(out, indent=2) + "\n")
    print(f"wrote {path}")


if __name__ == "__main__":
    main()
