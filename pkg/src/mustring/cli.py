"""Command-line driver: ``mustring <subcommand> [options]``.

Every output carries a run manifest (subcommand, configuration, cutoffs,
tolerances, seed, outputs): CSV files start with a ``# {json}`` line and
JSON records embed it with a schema version. Exit codes: 0 success,
1 invalid input, 2 numerical failure, 3 failed acceptance checks.
"""

from __future__ import annotations

import os

# thread caps must be in place before numpy loads its BLAS
_THREADS = os.environ.get("MUSTRING_THREADS")
if _THREADS:
    for _name in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS", "NUMEXPR_NUM_THREADS"):
        os.environ.setdefault(_name, _THREADS)

import argparse
import csv
import io
import json
import sys
from dataclasses import asdict
from typing import Optional, Sequence

from . import __version__
from .errors import MustringError, NumericalError, ValidationError

SCHEMA_VERSION = 1
EXIT_VALIDATION = 1
EXIT_NUMERICAL = 2
EXIT_CHECKS_FAILED = 3


class ArgumentError(ValidationError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ArgumentError(message)


# output ---------------------------------------------------------------------------


def fmt(value) -> str:
    if isinstance(value, bool):
        return str(int(value))
    if isinstance(value, int):
        return str(value)
    return format(float(value), ".17g")


def _clean(value):
    """JSON-safe copy with floats at full precision and numpy scalars unwrapped."""
    import numpy as np

    if isinstance(value, dict):
        return {str(k): _clean(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_clean(v) for v in value]
    if isinstance(value, np.ndarray):
        return [_clean(v) for v in value.tolist()]
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (np.floating,)):
        return float(value)
    if isinstance(value, (np.bool_,)):
        return bool(value)
    if isinstance(value, complex):
        return {"re": value.real, "im": value.imag}
    return value


def render_csv(manifest: dict, columns: Sequence[str], rows) -> str:
    buffer = io.StringIO()
    buffer.write("# " + json.dumps(_clean(manifest), sort_keys=True) + "\n")
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([fmt(v) for v in row])
    return buffer.getvalue()


def render_json(manifest: dict, record: dict) -> str:
    body = {"schema_version": SCHEMA_VERSION, "manifest": manifest, **record}
    return json.dumps(_clean(body), sort_keys=True, indent=2) + "\n"


def emit(text: str, path: Optional[str]):
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(path, "w", newline="") as handle:
            handle.write(text)


def manifest(args, **extra) -> dict:
    base = {
        "subcommand": args.command,
        "version": __version__,
        "seed": args.seed,
        "tolerance": args.tol,
        "outputs": {"out": args.out, "json": args.json},
    }
    base.update(extra)
    return base


# configuration ----------------------------------------------------------------------


def string_params(args):
    from .model import PRESETS, load_config

    if args.config:
        return load_config(args.config)
    name = args.preset or "diagonal"
    if name not in PRESETS:
        raise ArgumentError(f"unknown string preset {name!r}; choose from {sorted(PRESETS)}")
    return PRESETS[name]


def derived_for(params, branch: str):
    from .errors import UnsolvableAlpha
    from .model import derive_constants

    if branch != "auto":
        return derive_constants(params, branch)
    try:
        return derive_constants(params, "lower")
    except UnsolvableAlpha:
        return derive_constants(params, "upper")


def _config_snapshot(params, d) -> dict:
    return {"params": asdict(params), "branch": d.branch}


# subcommands ---------------------------------------------------------------------------


def cmd_modes(args) -> int:
    import numpy as np

    from .spectrum import find_modes, frequency_equation

    params = string_params(args)
    d = derived_for(params, args.branch)
    count = args.count or 10
    table = find_modes(d, args.cutoff or count).truncated(count)
    rows = []
    for mode in table:
        w = mode.omega
        scale = abs(w**2 * (d.mu0 + d.mul) - d.r0 - d.rl) * w + abs((d.mu0 * w**2 - d.r0) * (d.mul * w**2 - d.rl) - w**2) + 1e-300
        rows.append((mode.index, w, mode.gm, mode.boundary0, mode.boundaryl, abs(float(frequency_equation(w, d))) / scale))
    info = manifest(args, config=_config_snapshot(params, d), cutoffs={"count": count, "intervals": table.cutoff})
    emit(render_csv(info, ["m", "omega", "gm", "Xhat(0)", "Xhat(ell)", "residual"], rows), args.out)
    if args.json:
        emit(render_json(info, {"modes": [dict(zip(["m", "omega", "gm", "Xhat0", "Xhatl", "residual"], r)) for r in rows]}), args.json)
    return 0


def cmd_evolve(args) -> int:
    import numpy as np

    from . import dynamics as dyn
    from .spectrum import find_modes

    params = string_params(args)
    d = derived_for(params, args.branch)
    table = find_modes(d, args.cutoff or 40)
    data = dyn.evolve(dyn.gaussian_data(d, args.center, args.width, args.amplitude), 0.0, table)
    expansion = data.expansion
    E0 = dyn.energy(data, d)
    x = np.linspace(0.0, d.ell, 33)
    rows = []
    for t in np.linspace(0.0, args.tmax, args.steps + 1):
        state = expansion.cauchy_data(float(t))
        rows.append((
            float(t),
            dyn.energy(state, d),
            expansion.boundary_value(float(t), 0),
            expansion.boundary_value(float(t), 1),
            float(np.max(np.abs(dyn.interior_wave_residual(expansion, float(t), x)))),
        ))
    info = manifest(
        args, config=_config_snapshot(params, d), cutoffs={"intervals": table.cutoff, "modes": len(table)},
        initial={"center": args.center, "width": args.width, "amplitude": args.amplitude},
    )
    emit(render_csv(info, ["t", "energy", "u(0)", "u(ell)", "wave_residual"], rows), args.out)
    if args.json:
        drift = max(abs(r[1] - E0) for r in rows) / E0
        emit(render_json(info, {"energy": E0, "relative_drift": drift}), args.json)
    return 0


def cmd_fock(args) -> int:
    import numpy as np

    from . import fock
    from .spectrum import find_modes

    params = string_params(args)
    d = derived_for(params, args.branch)
    if args.kind == "factorization":
        N = args.count or 1000
        table = find_modes(d, args.cutoff or N + 1)
        report = fock.factorization_diagnostic(table, N=N)
        rows = [
            (k + 1, int(report.n[k]), report.coefficients[k], report.partial_sums[k], report.harmonic[k])
            for k in range(N)
        ]
        info = manifest(args, config=_config_snapshot(params, d), cutoffs={"count": N, "intervals": table.cutoff}, kind="factorization")
        emit(render_csv(info, ["N", "interval", "coefficient", "S_N", "C*H_N"], rows), args.out)
        record = {"leading": report.leading, "S_N": report.partial_sums[-1]}
    else:
        labels = [int(s) for s in args.labels.split(",") if s.strip()]
        table = find_modes(d, args.cutoff or max(labels) + 1)
        M = len(table)
        v = fock.OneParticleVector.basis(labels[0], M)
        for n in labels[1:]:
            v = v + fock.OneParticleVector.basis(n, M)
        rows = []
        for t in np.linspace(0.0, args.tmax, args.steps + 1):
            r = fock.trace_nonunitarity_rate(v, float(t), table)
            rows.append((float(t), r.omega0.real, r.omega0.imag, r.rate, r.norm_squared))
        info = manifest(args, config=_config_snapshot(params, d), cutoffs={"intervals": table.cutoff}, kind="trace", labels=labels)
        emit(render_csv(info, ["t", "Re omega0", "Im omega0", "rate", "norm_squared"], rows), args.out)
        record = {"max_abs_rate": max(abs(r[3]) for r in rows)}
    if args.json:
        emit(render_json(info, record), args.json)
    return 0


def cmd_bogoliubov(args) -> int:
    import numpy as np

    from . import bogoliubov as bg

    if args.dirichlet:
        bc = bg.FieldBC.dirichlet(args.ell)
    else:
        bc = bg.FieldBC.robin(args.r0, args.rl, args.ell)
    X_I = bg.embedding_preset(args.initial, args.ell)
    X_F = bg.embedding_preset(args.preset or "tilted:0.3", args.ell)
    counts = bg.dyadic_counts(args.n0, args.n)
    modes = bg.exp_modes(bc, counts[-1])
    matrices = bg.bogoliubov_matrices(X_I, X_F, modes)
    result = bg.unitarity_classification(X_I, X_F, bc, N=args.n, N0=args.n0, matrices=matrices)
    info = manifest(
        args,
        field={"dirichlet": args.dirichlet, "r0": args.r0, "rl": args.rl, "ell": args.ell},
        embeddings={"initial": args.initial, "final": args.preset or "tilted:0.3"},
        cutoffs={"n": args.n, "n0": args.n0, "modes": counts[-1]},
    )
    emit(render_json(info, result.to_dict()), args.out)
    if args.beta_csv:
        size = min(args.count or args.n, len(modes))
        power = np.abs(matrices.beta[:size, :size])
        rows = [(l + 1, m + 1, power[l, m]) for l in range(size) for m in range(size)]
        emit(render_csv(info, ["l", "m", "|beta_lm|"], rows), args.beta_csv)
    return 0


def cmd_pmech(args) -> int:
    import numpy as np

    from . import param_mech as pm

    W = pm.potential_preset(args.preset or "harmonic:1")
    lapse = pm.lapse_preset(args.lapse)
    traj = pm.integrate_orbit((args.q0, args.t0, args.p0), lapse, W, (0.0, args.smax), args.steps, args.mass)
    stride = max(1, args.steps // (args.count or 200))
    rows = [(traj.s[i], *traj.states[i]) for i in range(0, len(traj.s), stride)]
    info = manifest(
        args, potential=W.name, lapse=lapse.name,
        initial={"q": args.q0, "t": args.t0, "p": args.p0, "m": args.mass},
        cutoffs={"steps": args.steps, "s_max": args.smax},
    )
    emit(render_csv(info, ["s", "q", "t", "p"], rows), args.out)
    if args.json:
        taus = [float(x) for x in args.taus.split(",")]
        points = [pm.gauge_fix(traj, tau) for tau in taus]
        record = {
            "gauge_fixed": [
                {"tau": tau, "q": q, "p": p, "energy": pm.observable((q, p), "energy", W, args.mass)}
                for tau, (q, p) in zip(taus, points)
            ],
            "max_zero_energy_residual": float(np.max(np.abs(pm.zero_energy_residual(traj)))),
            "max_tangency_residual": float(np.max(np.abs(pm.tangency_residual(traj)))),
        }
        emit(render_json(info, record), args.json)
    return 0


def cmd_verify(args) -> int:
    from .acceptance import run_checks

    results = run_checks(quick=args.quick)
    for r in results:
        print(r.line(), flush=True)
    passed = sum(r.ok for r in results)
    print(f"{passed}/{len(results)} checks passed")
    if args.json:
        info = manifest(args, quick=args.quick)
        record = {"checks": [{"number": r.number, "title": r.title, "passed": r.ok, "measured": r.measured} for r in results]}
        emit(render_json(info, record), args.json)
    return 0 if passed == len(results) else EXIT_CHECKS_FAILED


# parser ----------------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--config", help="key = value parameter file")
    common.add_argument("--out", help="primary output path (default: stdout)")
    common.add_argument("--json", help="also write a JSON record here")
    common.add_argument("--count", type=int, help="number of rows or modes")
    common.add_argument("--cutoff", type=int, help="mode cutoff (number of frequency intervals)")
    common.add_argument("--nmax", type=int, default=12, help="particle-number cutoff")
    common.add_argument("--preset", help="NAME[:ARGS] preset")
    common.add_argument("--tol", type=float, default=1e-10, help="quadrature tolerance")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--branch", choices=["auto", "lower", "upper"], default="auto", help="measure-weight branch")
    common.add_argument("--json-errors", action="store_true", help="report errors as JSON on stderr")

    parser = _Parser(prog="mustring", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("modes", parents=[common], help="frequencies and normalized modes")
    p.set_defaults(run=cmd_modes)

    p = sub.add_parser("evolve", parents=[common], help="evolve Gaussian initial data")
    p.add_argument("--center", type=float, default=None)
    p.add_argument("--width", type=float, default=0.1)
    p.add_argument("--amplitude", type=float, default=1.0)
    p.add_argument("--tmax", type=float, default=10.0)
    p.add_argument("--steps", type=int, default=100)
    p.set_defaults(run=cmd_evolve)

    p = sub.add_parser("fock", parents=[common], help="factorization sums or boundary non-unitarity")
    p.add_argument("--kind", choices=["factorization", "trace"], default="factorization")
    p.add_argument("--labels", default="1,2", help="mode indices summed into the one-particle label")
    p.add_argument("--tmax", type=float, default=5.0)
    p.add_argument("--steps", type=int, default=100)
    p.set_defaults(run=cmd_fock)

    p = sub.add_parser("bogoliubov", parents=[common], help="Bogoliubov coefficients between embeddings")
    p.add_argument("--n", type=int, default=40, help="largest N in the dyadic increments S_2N - S_N")
    p.add_argument("--n0", type=int, default=10, help="smallest N in the dyadic table")
    p.add_argument("--initial", default="flat", help="initial embedding preset")
    p.add_argument("--dirichlet", action="store_true")
    p.add_argument("--r0", type=float, default=0.5)
    p.add_argument("--rl", type=float, default=0.7)
    p.add_argument("--ell", type=float, default=1.0)
    p.add_argument("--beta-csv", help="write |beta_lm| for l, m <= count here")
    p.set_defaults(run=cmd_bogoliubov)

    p = sub.add_parser("pmech", parents=[common], help="parametrized particle orbits")
    p.add_argument("--lapse", default="const:1")
    p.add_argument("--q0", type=float, default=1.0)
    p.add_argument("--t0", type=float, default=0.0)
    p.add_argument("--p0", type=float, default=0.5)
    p.add_argument("--mass", type=float, default=1.0)
    p.add_argument("--smax", type=float, default=10.0)
    p.add_argument("--steps", type=int, default=10_000)
    p.add_argument("--taus", default="0,1,5", help="clock values for the gauge-fixed observables")
    p.set_defaults(run=cmd_pmech)

    p = sub.add_parser("verify", parents=[common], help="run the acceptance checks")
    p.add_argument("--quick", action="store_true", help="skip the heavy checks")
    p.set_defaults(run=cmd_verify)
    return parser


def _report(exc: Exception, code: int, as_json: bool):
    if as_json:
        payload = {"error": type(exc).__name__, "message": str(exc), "exit_code": code}
        for attr in ("key", "line", "interval"):
            if getattr(exc, attr, None) is not None:
                payload[attr] = getattr(exc, attr)
        sys.stderr.write(json.dumps(_clean(payload), sort_keys=True) + "\n")
    else:
        sys.stderr.write(f"mustring: {type(exc).__name__}: {exc}\n")


def main(argv: Optional[Sequence[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    as_json = "--json-errors" in argv
    try:
        args = build_parser().parse_args(argv)
        return args.run(args)
    except ValidationError as exc:
        _report(exc, EXIT_VALIDATION, as_json)
        return EXIT_VALIDATION
    except (NumericalError, ArithmeticError) as exc:
        _report(exc, EXIT_NUMERICAL, as_json)
        return EXIT_NUMERICAL
    except OSError as exc:
        _report(exc, EXIT_VALIDATION, as_json)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
