"""Frequencies against their large-m form: m, omega, asymptote, m^3 |omega - asymptote|."""

import argparse
import csv
import sys

from mustring.model import PRESETS, derive_constants
from mustring.spectrum import asymptotic_frequency, find_modes


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--preset", default="baseline", choices=sorted(PRESETS))
    parser.add_argument("--branch", default="upper", choices=["lower", "upper"])
    parser.add_argument("--cutoff", type=int, default=201)
    args = parser.parse_args()

    d = derive_constants(PRESETS[args.preset], args.branch)
    writer = csv.writer(sys.stdout, lineterminator="\n")
    writer.writerow(["interval", "omega", "asymptote", "scaled_residual"])
    for mode in find_modes(d, args.cutoff):
        m = mode.interval
        if m == 0:
            continue
        asym = float(asymptotic_frequency(m, d))
        writer.writerow([m, f"{mode.omega:.17g}", f"{asym:.17g}", f"{m**3 * abs(mode.omega - asym):.6g}"])


if __name__ == "__main__":
    main()
