"""Unitarity classes over a family of final slices: boundary slope against the dyadic increments."""

import argparse
import csv
import sys

import numpy as np

import mustring.bogoliubov as bg


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--n", type=int, default=40)
    parser.add_argument("--r0", type=float, default=0.5)
    parser.add_argument("--rl", type=float, default=0.7)
    parser.add_argument("--slopes", default="0,0.05,0.1,0.2,0.3,0.5")
    parser.add_argument("--bumps", default="0.1,0.2,0.3")
    args = parser.parse_args()

    bc = bg.FieldBC.robin(args.r0, args.rl)
    counts = bg.dyadic_counts(10, args.n)
    modes = bg.exp_modes(bc, counts[-1])
    initial = bg.flat(0.0)
    finals = [bg.tilted(float(s)) for s in args.slopes.split(",")]
    finals += [bg.bump(float(a)) for a in args.bumps.split(",")]
    writer = csv.writer(sys.stdout, lineterminator="\n")
    writer.writerow(["final", "left_slope", "decision", "evidence_agrees", *[f"inc_{n}" for n in counts[:-1]]])
    for X_F in finals:
        matrices = bg.bogoliubov_matrices(initial, X_F, modes)
        c = bg.unitarity_classification(initial, X_F, bc, N=args.n, matrices=matrices)
        writer.writerow([X_F.name, c.slopes_F[0], c.decision, c.evidence_agrees, *[f"{v:.4g}" for v in c.increments]])


if __name__ == "__main__":
    main()
