"""Partial sums of the squared boundary-unit coefficients against the harmonic prediction."""

import argparse
import csv
import math
import sys

import numpy as np

from mustring.fock import factorization_diagnostic
from mustring.model import PRESETS, derive_constants
from mustring.spectrum import find_modes


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--preset", default="diagonal", choices=sorted(PRESETS))
    parser.add_argument("--cutoff", type=int, default=8001)
    parser.add_argument("--points", type=int, default=25)
    args = parser.parse_args()

    d = derive_constants(PRESETS[args.preset])
    report = factorization_diagnostic(find_modes(d, args.cutoff))
    counts = np.unique(np.geomspace(10, len(report.partial_sums) // 2, args.points).astype(int))
    writer = csv.writer(sys.stdout, lineterminator="\n")
    writer.writerow(["N", "S_N", "C_H_N", "S_2N_minus_S_N", "C_ln2"])
    for N in counts:
        S, S2 = report.partial_sums[N - 1], report.partial_sums[2 * N - 1]
        writer.writerow([N, f"{S:.10g}", f"{report.harmonic[N - 1]:.10g}", f"{S2 - S:.10g}", f"{report.leading * math.log(2):.10g}"])


if __name__ == "__main__":
    main()
