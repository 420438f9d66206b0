#!/usr/bin/env python3
"""Sweep the node lines of the lower adiabatic state over ring radius.

For each radius the anchor-overlap zeros are located numerically on the
circle and compared against the closed form: a single node at theta = pi
while r g < k, two nodes at +-arccos(k/(g r)) outside.  The node count K
flips parity exactly on the degeneracy circle r = 2k/g, which is where the
sign change of the transported eigenvector switches on and off.

Typical use:
    python3 scripts/node_sweep.py --k 1 --g 1 --r-min 0.2 --r-max 6 --steps 30
"""

import argparse
import math
import sys

import numpy as np

from berryline import JTParams, nodal_map


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--k", type=float, default=1.0, help="linear coupling")
    ap.add_argument("--g", type=float, default=1.0, help="quadratic coupling")
    ap.add_argument("--r-min", type=float, default=0.2)
    ap.add_argument("--r-max", type=float, default=6.0)
    ap.add_argument("--steps", type=int, default=30)
    ap.add_argument("--theta-samples", type=int, default=2048)
    ap.add_argument("--csv", help="also write the table to this file")
    args = ap.parse_args(argv)

    p = JTParams(args.k, args.g)
    radii = np.linspace(args.r_min, args.r_max, args.steps)
    result = nodal_map(p, radii, theta_samples=args.theta_samples)

    print(f"# k={args.k} g={args.g}  theta_samples={args.theta_samples}")
    if result.degeneracies:
        marks = ", ".join(f"({x:+.4f}, {y:+.4f})"
                          for x, y in (d.cartesian() for d in
                                       result.degeneracies))
        print(f"# degeneracies: {marks}")
    print(f"{'r':>8}  {'K':>2}  {'numeric nodes':<28}  {'max |err|':>10}")

    lines = ["r,count,numeric_angles,max_abs_err"]
    for row in result.rows:
        err = max((abs(a - b) for a, b in zip(row.numeric_angles,
                                              row.analytic_angles)),
                  default=0.0)
        shown = " ".join(f"{a:.5f}" for a in row.numeric_angles) or "-"
        print(f"{row.r:8.4f}  {row.count:2d}  {shown:<28}  {err:10.2e}")
        lines.append(f"{row.r!r},{row.count},"
                     f"\"{' '.join(repr(a) for a in row.numeric_angles)}\","
                     f"{err!r}")
    for r in result.skipped_radii:
        print(f"{r:8.4f}   -  on the degeneracy circle, skipped")

    if args.csv:
        with open(args.csv, "w", encoding="utf-8") as fh:
            fh.write("\n".join(lines) + "\n")
        print(f"# wrote {args.csv}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
