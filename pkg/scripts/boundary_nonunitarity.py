"""Boundary trace frequency and coherent-norm rate along the evolution of a two-mode label."""

import argparse
import csv
import sys

import numpy as np

from mustring.fock import OneParticleVector, trace_nonunitarity_rate
from mustring.model import PRESETS, derive_constants
from mustring.spectrum import find_modes


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--preset", default="diagonal", choices=sorted(PRESETS))
    parser.add_argument("--labels", default="1,2")
    parser.add_argument("--tmax", type=float, default=5.0)
    parser.add_argument("--steps", type=int, default=200)
    args = parser.parse_args()

    d = derive_constants(PRESETS[args.preset])
    table = find_modes(d, 12)
    labels = [int(n) for n in args.labels.split(",")]
    v = OneParticleVector(np.zeros(max(labels)))
    for n in labels:
        v = v + OneParticleVector.basis(n, max(labels))
    writer = csv.writer(sys.stdout, lineterminator="\n")
    writer.writerow(["t", "re_omega0", "im_omega0", "rate", "boundary_norm_squared"])
    for t in np.linspace(0.0, args.tmax, args.steps + 1):
        r = trace_nonunitarity_rate(v, float(t), table)
        writer.writerow([f"{t:.6g}", f"{r.omega0.real:.10g}", f"{r.omega0.imag:.10g}", f"{r.rate:.10g}", f"{r.norm_squared:.10g}"])


if __name__ == "__main__":
    main()
