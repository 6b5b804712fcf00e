"""Acceptance checks: one function per criterion, each timed against its budget.

Each check returns a ``CheckResult`` carrying the measured quantities, so
the pytest suite and ``mustring verify`` share a single implementation.
"""

from __future__ import annotations

import math
import time
import warnings
from dataclasses import dataclass, field
from typing import Callable, Dict, List

import numpy as np

from . import bogoliubov as bg
from . import dynamics as dyn
from . import fock
from . import param_mech as pm
from .model import PRESETS, StringParams, derive_constants
from .mu_space import Quadrature, inner_mu, laplacian_mu, modified_inner
from .spectrum import (
    asymptotic_frequency,
    asymptotic_inverse_gm,
    completeness_identities,
    find_modes,
    interval_roots,
    mode_functions,
    tail_cutoff,
)


@dataclass
class CheckResult:
    number: int
    title: str
    passed: bool
    measured: Dict[str, float]
    elapsed: float
    budget: float
    heavy: bool = False

    @property
    def within_budget(self) -> bool:
        return self.elapsed <= self.budget

    @property
    def ok(self) -> bool:
        return self.passed and self.within_budget

    def line(self) -> str:
        status = "PASS" if self.ok else "FAIL"
        facts = ", ".join(f"{k}={_fmt(v)}" for k, v in self.measured.items())
        return f"[{status}] {self.number:2d} {self.title} ({self.elapsed:.2f}s/{self.budget:.0f}s): {facts}"


def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return f"{float(v):.3g}"


CHECKS: Dict[int, Callable[[], CheckResult]] = {}


def check(number: int, title: str, budget: float, heavy: bool = False):
    def register(fn):
        def run() -> CheckResult:
            start = time.perf_counter()
            passed, measured = fn()
            return CheckResult(number, title, bool(passed), measured, time.perf_counter() - start, budget, heavy)

        run.__name__ = fn.__name__
        run.heavy = heavy
        run.title = title
        CHECKS[number] = run
        return run

    return register


# spectrum -----------------------------------------------------------------------


@check(1, "Neumann frequencies are m pi/ell", 1.0)
def neumann_exactness():
    d = derive_constants(PRESETS["neumann"])
    roots = np.array([w for _, w in interval_roots(d, range(1, 51))])
    error = float(np.max(np.abs(roots - np.arange(1, 51) * math.pi / d.ell)))
    return error < 1e-10, {"max_error": error}


def _baseline():
    # mu = r = 1 exceeds the lower-branch bound; frequencies depend only on mu and r
    return derive_constants(PRESETS["baseline"], branch="upper")


@check(2, "frequency asymptotics with two masses", 5.0)
def frequency_asymptotics():
    d = _baseline()
    table = find_modes(d, 201)
    m = table.intervals
    keep = (m >= 50) & (m <= 200)
    m = m[keep]
    scaled = np.abs(table.omegas[keep] - asymptotic_frequency(m, d)) * m**3
    slope = float(np.polyfit(np.log(m), np.log(scaled), 1)[0])
    at50 = float(scaled[0])
    # bounded: the scaled residual never climbs above its value at m = 50 by more than 0.1%
    passed = bool(np.all(np.isfinite(scaled))) and float(np.max(scaled)) <= at50 * 1.001 and slope < 1e-3
    return passed, {"max_scaled": float(np.max(scaled)), "at_50": at50, "loglog_slope": slope}


@check(3, "normalization asymptotics and closed form", 10.0)
def normalization_asymptotics():
    d = _baseline()
    table = find_modes(d, 201)
    mode = table.modes[int(np.nonzero(table.intervals == 200)[0][0])]
    limit = float(asymptotic_inverse_gm(1.0, d))
    ratio = (200**2 / mode.gm) / limit
    q = Quadrature(tol=1e-13)
    worst = 0.0
    for mode in table.modes[:30]:
        X = mode_functions(mode, d)[0]
        worst = max(worst, abs(modified_inner(X, X, d, q) / mode.gm**2 - 1.0))
    return abs(ratio - 1) < 0.01 and worst < 1e-8, {"ratio_at_200": ratio, "max_rel_gm2": worst}


@check(4, "orthonormality and eigen-residuals", 20.0)
def orthonormality():
    d = derive_constants(PRESETS["diagonal"])
    table = find_modes(d, 30).truncated(30)
    hats = [mode_functions(m, d)[1] for m in table]
    q = Quadrature(tol=1e-12)
    gram = np.array([[inner_mu(a, b, d, q) for b in hats] for a in hats])
    gram_error = float(np.max(np.abs(gram - np.eye(len(hats)))))
    x = np.linspace(0.0, d.ell, 401)
    worst = 0.0
    for mode, hat in zip(table, hats):
        lap = laplacian_mu(hat, d)
        w2 = mode.omega**2
        residual = max(
            float(np.max(np.abs(lap(x) + w2 * hat(x)))),
            abs(lap.v0 + w2 * hat.v0),
            abs(lap.vl + w2 * hat.vl),
        )
        worst = max(worst, residual / w2)
    return gram_error < 1e-8 and worst < 1e-8, {"gram_error": gram_error, "eigen_residual_over_w2": worst}


@check(5, "completeness identities at the tail cutoff", 10.0)
def completeness():
    d = derive_constants(PRESETS["diagonal"])
    N = tail_cutoff(0.02, d)
    table = find_modes(d, N + 1)
    report = completeness_identities(table, N)
    left = float(report.left_weight[0])
    cross = float(report.cross[0])
    return abs(left - 1) < 0.02 and abs(cross) < 0.02, {"N": N, "left_weight": left, "cross": cross}


@check(6, "boundary unit vector is not square summable", 30.0)
def non_factorization():
    d = derive_constants(PRESETS["diagonal"])
    table = find_modes(d, 10_001)
    report = fock.factorization_diagnostic(table)
    n = report.n
    C = report.leading
    at2000 = float(n[n == 2000][0] * report.coefficients[n == 2000][0] ** 2 / C)
    counts = np.unique(np.geomspace(1000, 10_000, 41).astype(int))
    ratios = report.partial_sums[counts - 1] / (C * np.log(counts))
    worst = float(np.max(np.abs(ratios - 1)))
    return abs(at2000 - 1) < 0.05 and worst < 0.10, {"n_coef2_over_C": at2000, "max_log_deviation": worst}


# Fock space ---------------------------------------------------------------------


def _random_vector(rng, M, scale=0.4):
    return fock.OneParticleVector(scale * (rng.normal(size=M) + 1j * rng.normal(size=M)))


@check(7, "Fock algebra on random truncated instances", 10.0)
def fock_algebra(seed: int = 7, trials: int = 5, modes: int = 3, nmax: int = 16):
    rng = np.random.default_rng(seed)
    overlap = eig = expo = functor = 0.0
    bound_ok = True
    for _ in range(trials):
        v, w, u = (_random_vector(rng, modes) for _ in range(3))
        ev, ew = fock.coherent_state(v, nmax), fock.coherent_state(w, nmax)
        bound = fock.overlap_tail_bound(v, w, nmax)
        err = abs(fock.fock_inner(ev, ew) - np.exp(fock.inner_plus(v, w)))
        bound_ok &= err <= bound + 1e-14 and bound <= 1e-8
        overlap = max(overlap, err)

        lhs = fock.annihilate(u, ev) - ev.scale(fock.inner_plus(u, v))
        eig = max(eig, max((abs(a) for k, a in lhs.amplitudes.items() if sum(k) < nmax), default=0.0))

        parts = [[0], list(range(1, modes))]
        va, vb = fock.split_state(v, parts)
        wa, wb = fock.split_state(w, parts)
        product = fock.fock_inner(fock.coherent_state(va, nmax), fock.coherent_state(wa, nmax)) * fock.fock_inner(
            fock.coherent_state(vb, nmax), fock.coherent_state(wb, nmax)
        )
        expo = max(expo, abs(fock.fock_inner(ev, ew) - product))

        T = 0.5 * (rng.normal(size=(modes, modes)) + 1j * rng.normal(size=(modes, modes)))
        diff = fock.second_quantize_map(T, ev) - fock.coherent_state(v.apply(T), nmax, tol=None)
        functor = max(functor, fock.fock_norm(diff))
    passed = bound_ok and eig < 1e-10 and expo < 1e-8 and functor < 1e-8
    return passed, {"nmax": nmax, "overlap_error": overlap, "eigen_error": eig, "exp_law_error": expo, "functor_error": functor}


@check(8, "boundary trace dynamics is not unitary", 10.0)
def boundary_nonunitarity(t: float = 0.7, h: float = 1e-4):
    d = derive_constants(PRESETS["diagonal"])
    table = find_modes(d, 10)
    M = len(table)
    single = fock.trace_nonunitarity_rate(fock.OneParticleVector.basis(1, M), t, table)
    pair = fock.OneParticleVector.basis(1, M) + fock.OneParticleVector.basis(2, M)
    rate = fock.trace_nonunitarity_rate(pair, t, table)

    def truncated_norm(s):
        z = fock.trace_nonunitarity_rate(pair, s, table).trace
        return fock.fock_norm(fock.coherent_state(fock.OneParticleVector([z]), 60, tol=1e-14)) ** 2

    fd = (truncated_norm(t + h) - truncated_norm(t - h)) / (2 * h)
    rel = abs(fd - rate.rate) / abs(rate.rate)
    passed = abs(single.rate) < 1e-12 and abs(rate.omega0.imag) > 0 and rel < 1e-5
    return passed, {"single_rate": abs(single.rate), "im_omega0": rate.omega0.imag, "rate_rel_error": rel}


# Bogoliubov ---------------------------------------------------------------------

BOGOLIUBOV_BC = bg.FieldBC.robin(0.5, 0.7)


@check(9, "Klein-Gordon pairing", 30.0)
def kg_pairing():
    modes = bg.exp_modes(BOGOLIUBOV_BC, 15)
    flat = bg.flat(0.0)
    pp, pm_, _ = bg.pairing_gram(modes, flat)
    mm = -np.conj(pp)  # <<phi^-_k, phi^-_l>> = -conj <<phi^+_k, phi^+_l>>
    flat_error = max(
        float(np.max(np.abs(pp - np.eye(15)))),
        float(np.max(np.abs(pm_))),
        float(np.max(np.abs(mm + np.eye(15)))),
    )
    rng = np.random.default_rng(9)
    tilted = bg.tilted(0.3, -0.2)
    slice_error = 0.0
    for _ in range(3):
        a = bg.ModeSolution(tuple(modes), rng.normal(size=15) + 1j * rng.normal(size=15), rng.normal(size=15) + 1j * rng.normal(size=15))
        b = bg.ModeSolution(tuple(modes), rng.normal(size=15) + 1j * rng.normal(size=15), rng.normal(size=15) + 1j * rng.normal(size=15))
        on_flat = bg.kg_pairing(a, b, flat).value
        on_tilted = bg.kg_pairing(a, b, tilted).value
        slice_error = max(slice_error, abs(on_flat - on_tilted))
    return flat_error < 1e-8 and slice_error < 1e-6, {"flat_error": flat_error, "slice_error": slice_error}


@check(10, "Bogoliubov coefficients and unitarity classes", 300.0, heavy=True)
def bogoliubov_baseline(N: int = 80):
    counts = bg.dyadic_counts(10, N)
    modes = bg.exp_modes(BOGOLIUBOV_BC, counts[-1])
    flat = bg.flat(0.0)
    small = modes[:20]
    same = bg.bogoliubov_matrices(flat, flat, small)
    later = bg.bogoliubov_matrices(flat, bg.flat(1.3), small)
    tilted = bg.unitarity_classification(flat, bg.tilted(0.3), BOGOLIUBOV_BC, N=N)
    curved = bg.unitarity_classification(flat, bg.bump(0.2), BOGOLIUBOV_BC, N=N)
    window = [i for i, n in enumerate(counts[:-1]) if 20 <= n <= N]
    tilted_inc = np.array(tilted.increments)[window]
    curved_inc = np.array(curved.increments)[window]
    passed = (
        float(np.max(np.abs(same.beta))) < 1e-8
        and float(np.max(np.abs(later.beta))) < max(later.error, 1e-12) * 10
        and tilted.decision == "NonUnitary"
        and float(np.min(tilted_inc)) >= tilted.floor > 0
        and curved.decision == "Unitary"
        and bool(np.all(np.diff(curved_inc) < 0))
    )
    return passed, {
        "same_max_beta": float(np.max(np.abs(same.beta))),
        "flat_max_beta": float(np.max(np.abs(later.beta))),
        "tilted_min_increment": float(np.min(tilted_inc)),
        "tilted_floor": tilted.floor,
        "curved_last_increment": float(curved_inc[-1]),
    }


# classical dynamics ---------------------------------------------------------------


def _rk4_two_mass(params: StringParams, ic, T: float, dt: float):
    """Reference oracle: two masses joined by a massless string of stiffness gamma/ell."""
    y = np.array(ic, dtype=float)
    k = params.gamma / params.ell

    def rhs(y):
        force = k * (y[1] - y[0])
        return np.array([y[2], y[3], force / params.m0, -force / params.ml])

    out = [y.copy()]
    for _ in range(int(round(T / dt))):
        k1 = rhs(y)
        k2 = rhs(y + dt / 2 * k1)
        k3 = rhs(y + dt / 2 * k2)
        k4 = rhs(y + dt * k3)
        y = y + dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        out.append(y.copy())
    return np.array(out)


@check(11, "classical dynamics", 30.0)
def classical_dynamics():
    params = PRESETS["diagonal"]
    d = derive_constants(params)
    table = find_modes(d, 40)
    with warnings.catch_warnings():
        warnings.simplefilter("error", dyn.TruncationWarning)
        data = dyn.evolve(dyn.gaussian_data(d, width=0.1), 0.0, table)
    E0 = dyn.energy(data, d)
    drift = max(abs(dyn.energy(dyn.evolve(data, t, table), d) - E0) for t in np.linspace(1.0, 10.0, 10)) / E0

    two = StringParams(rho=0.0, gamma=1.0, ell=1.0, m0=1.0, ml=2.0)
    ic = (0.1, -0.3, 0.5, 0.2)
    times = np.linspace(0.0, 10.0, 101)
    closed = dyn.two_mass_limit(two, ic, times)
    ref = _rk4_two_mass(two, ic, 10.0, 1e-3)[::100]
    limit_error = max(float(np.max(np.abs(ref[:, 0] - closed.left))), float(np.max(np.abs(ref[:, 1] - closed.right))))

    chain = 0.0
    for index in (1, 3, 5):
        state = dyn.evolve(dyn.mode_data(table, {index: 1.0}), 2.0, table)
        chain = max(chain, dyn.constraint_chain(state, 3, params, d).max_relative)
    passed = drift < 1e-8 and limit_error < 1e-9 and chain < 1e-8
    return passed, {"energy_drift": drift, "two_mass_error": limit_error, "chain_residual": chain}


@check(12, "parametrized mechanics", 5.0)
def parametrized_mechanics():
    W = pm.harmonic(1.0)
    y0 = (1.0, 0.0, 0.5)
    a = pm.integrate_orbit(y0, pm.constant_lapse(1.0), W, (0.0, 10.0), 10_000)
    b = pm.integrate_orbit(y0, pm.oscillating_lapse(0.5), W, (0.0, 10.0), 10_000)
    times = np.linspace(0.1, 6.0, 60)
    lapse = float(np.max(np.abs(pm.curve_in_time(a, times) - pm.curve_in_time(b, times))))
    energies = [pm.observable(pm.gauge_fix(a, tau), "energy", W) for tau in (0.0, 1.0, 5.0)]
    spread = float(np.ptp(energies))
    zero = float(np.max(np.abs(pm.zero_energy_residual(b))))
    return lapse < 1e-6 and spread < 1e-8 and zero < 1e-12, {"lapse_error": lapse, "energy_spread": spread, "zero_energy": zero}


def run_checks(numbers=None, quick: bool = False) -> List[CheckResult]:
    numbers = sorted(CHECKS) if numbers is None else numbers
    return [CHECKS[n]() for n in numbers if not (quick and CHECKS[n].heavy)]
