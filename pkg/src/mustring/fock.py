"""Truncated symmetric Fock space over the positive-frequency one-particle space.

States are stored in the occupation-number basis. The pairing follows the
permanent convention: <v^n, w^n> = n! <v, w>^n, so an occupation vector
|n_1 .. n_M> has squared norm prod n_i! and coherent states satisfy
<eps(v), eps(w)> = exp(<v, w>) exactly before truncation. Equivalently, a
state is a polynomial in commuting variables x_i: creation multiplies by
sum u_i x_i and annihilation applies sum conj(u_i) d/dx_i.
"""

from __future__ import annotations

import itertools
import math
import warnings
from dataclasses import dataclass
from typing import Dict, Iterable, Optional, Sequence, Tuple

import numpy as np

from .dynamics import CauchyData, ModeExpansion, expand
from .errors import CutoffMismatch, InvalidParams, TraceVanishes, TruncationOverflow, TruncationTooTight
from .model import DerivedConstants
from .mu_space import DEFAULT_QUADRATURE, MuFunction, Quadrature, inner_mu
from .spectrum import ModeTable

Occupation = Tuple[int, ...]


# one-particle space -----------------------------------------------------------


@dataclass(frozen=True)
class OneParticleVector:
    """Coefficients in the orthonormal basis Xhat_n / sqrt(2 omega_n)."""

    coeffs: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "coeffs", np.asarray(self.coeffs, dtype=complex))

    @property
    def cutoff(self) -> int:
        return len(self.coeffs)

    @classmethod
    def basis(cls, n: int, cutoff: int) -> "OneParticleVector":
        """The n-th basis vector (n is the 1-based mode index)."""
        coeffs = np.zeros(cutoff, dtype=complex)
        coeffs[n - 1] = 1.0
        return cls(coeffs)

    def __add__(self, other):
        _check_cutoff(self, other)
        return OneParticleVector(self.coeffs + other.coeffs)

    def __mul__(self, scalar):
        return OneParticleVector(scalar * self.coeffs)

    __rmul__ = __mul__

    def apply(self, matrix) -> "OneParticleVector":
        return OneParticleVector(np.asarray(matrix) @ self.coeffs)

    def norm(self) -> float:
        return math.sqrt(inner_plus(self, self).real)


def _check_cutoff(v, w):
    if v.cutoff != w.cutoff:
        raise CutoffMismatch(f"cutoffs differ: {v.cutoff} vs {w.cutoff}")


def inner_plus(v: OneParticleVector, w: OneParticleVector) -> complex:
    """<v, w>_+, antilinear in v."""
    _check_cutoff(v, w)
    return complex(np.vdot(v.coeffs, w.coeffs))


def inner_plus_labels(Q1: np.ndarray, Q2: np.ndarray, omegas: np.ndarray) -> complex:
    """2 sum conj(Q1_n) omega_n Q2_n for labels given by their Xhat coefficients."""
    return complex(2.0 * np.sum(np.conj(Q1) * omegas * Q2))


def labels_to_vector(labels: np.ndarray, omegas: np.ndarray) -> OneParticleVector:
    """Label coefficients Q_n (in the Xhat basis) to coordinates in the Xhat/sqrt(2 omega) basis."""
    return OneParticleVector(np.sqrt(2.0 * omegas) * np.asarray(labels))


def positive_frequency_split(
    data: CauchyData, table: ModeTable, q: Quadrature = DEFAULT_QUADRATURE
) -> OneParticleVector:
    """psi_n = sqrt(W_n/2) (Q_n - i V_n/W_n), with V = P/rho and W_n the time frequencies.

    This is the part of (Q, P) in the positive-frequency subspace P = i W Q,
    written in the orthonormal basis.
    """
    expansion = data.expansion if data.expansion is not None else expand(data, table, q)
    freq = table.time_frequencies
    return OneParticleVector(
        np.sqrt(freq / 2.0) * (expansion.position - 1j * expansion.velocity / freq)
    )


def negative_frequency_part(v: OneParticleVector) -> OneParticleVector:
    return OneParticleVector(np.conj(v.coeffs))


def reassemble(v: OneParticleVector, table: ModeTable) -> ModeExpansion:
    """Real Cauchy data whose positive-frequency part is v (inverse of the split)."""
    freq = table.time_frequencies[: v.cutoff]
    position = np.sqrt(2.0 / freq) * v.coeffs.real
    velocity = -np.sqrt(2.0 * freq) * v.coeffs.imag
    return ModeExpansion(table.truncated(v.cutoff), position, velocity)


# Fock states ------------------------------------------------------------------


def occupation_weight(n: Occupation) -> float:
    """<n|n> = prod n_i!."""
    return float(math.prod(math.factorial(k) for k in n))


@dataclass(frozen=True)
class FockState:
    """Sparse amplitudes over occupation tuples with total number <= nmax."""

    amplitudes: Dict[Occupation, complex]
    modes: int
    nmax: int
    overflow: bool = False

    def __post_init__(self):
        ordered = {k: complex(v) for k, v in sorted(self.amplitudes.items()) if v != 0}
        object.__setattr__(self, "amplitudes", ordered)

    @classmethod
    def vacuum(cls, modes: int, nmax: int) -> "FockState":
        return cls({(0,) * modes: 1.0}, modes, nmax)

    @classmethod
    def occupation(cls, n: Sequence[int], nmax: int, amplitude: complex = 1.0) -> "FockState":
        return cls({tuple(n): amplitude}, len(n), nmax)

    def __add__(self, other: "FockState") -> "FockState":
        _check_fock(self, other)
        out = dict(self.amplitudes)
        for k, v in other.amplitudes.items():
            out[k] = out.get(k, 0.0) + v
        return FockState(out, self.modes, self.nmax, self.overflow or other.overflow)

    def __sub__(self, other: "FockState") -> "FockState":
        return self + other.scale(-1.0)

    def scale(self, factor: complex) -> "FockState":
        return FockState({k: factor * v for k, v in self.amplitudes.items()}, self.modes, self.nmax, self.overflow)

    __mul__ = scale
    __rmul__ = scale

    def particle_numbers(self) -> Iterable[int]:
        return (sum(k) for k in self.amplitudes)

    def max_particles(self) -> int:
        return max(self.particle_numbers(), default=0)

    def to_vector(self, basis: Sequence[Occupation]) -> np.ndarray:
        return np.array([self.amplitudes.get(k, 0.0) for k in basis], dtype=complex)


def _check_fock(a: FockState, b: FockState):
    if a.modes != b.modes:
        raise CutoffMismatch(f"mode cutoffs differ: {a.modes} vs {b.modes}")


def fock_inner(a: FockState, b: FockState) -> complex:
    """<a, b>, antilinear in a."""
    _check_fock(a, b)
    total = 0j
    for k, v in a.amplitudes.items():
        w = b.amplitudes.get(k)
        if w is not None:
            total += np.conj(v) * w * occupation_weight(k)
    return complex(total)


def fock_norm(a: FockState) -> float:
    return math.sqrt(fock_inner(a, a).real)


def occupation_basis(modes: int, nmax: int):
    """All occupation tuples with total number <= nmax, in sorted order."""
    out = []
    for total in range(nmax + 1):
        for bars in itertools.combinations(range(total + modes - 1), modes - 1):
            edges = (-1, *bars, total + modes - 1)
            out.append(tuple(edges[i + 1] - edges[i] - 1 for i in range(modes)))
    return sorted(out)


def create(u: OneParticleVector, s: FockState) -> FockState:
    """a*(u): linear in u. Amplitude pushed past nmax is dropped and flagged."""
    if u.cutoff != s.modes:
        raise CutoffMismatch(f"vector cutoff {u.cutoff} vs state modes {s.modes}")
    out: Dict[Occupation, complex] = {}
    overflow = s.overflow
    for k, amp in s.amplitudes.items():
        if sum(k) + 1 > s.nmax:
            if np.any(u.coeffs != 0):
                overflow = True
            continue
        for i, ui in enumerate(u.coeffs):
            if ui == 0:
                continue
            key = k[:i] + (k[i] + 1,) + k[i + 1:]
            out[key] = out.get(key, 0.0) + ui * amp
    if overflow and not s.overflow:
        warnings.warn("creation past the particle-number cutoff was dropped", TruncationOverflow, stacklevel=2)
    return FockState(out, s.modes, s.nmax, overflow)


def annihilate(u: OneParticleVector, s: FockState) -> FockState:
    """a(u): antilinear in u."""
    if u.cutoff != s.modes:
        raise CutoffMismatch(f"vector cutoff {u.cutoff} vs state modes {s.modes}")
    out: Dict[Occupation, complex] = {}
    conj = np.conj(u.coeffs)
    for k, amp in s.amplitudes.items():
        for i, ui in enumerate(conj):
            if ui == 0 or k[i] == 0:
                continue
            key = k[:i] + (k[i] - 1,) + k[i + 1:]
            out[key] = out.get(key, 0.0) + ui * k[i] * amp
    return FockState(out, s.modes, s.nmax, s.overflow)


def coherent_tail(norm_squared: float, nmax: int) -> float:
    """exp(x) - sum_{n <= nmax} x^n/n!, the squared-norm mass lost to truncation."""
    x = float(norm_squared)
    term = 1.0
    partial = 1.0
    for n in range(1, nmax + 1):
        term *= x / n
        partial += term
    tail = 0.0
    n = nmax + 1
    term *= x / n
    while term > 1e-300 and (tail == 0.0 or term > 1e-18 * tail):
        tail += term
        n += 1
        term *= x / n
        if n > nmax + 10_000:
            break
    return tail


def overlap_tail_bound(v: OneParticleVector, w: OneParticleVector, nmax: int) -> float:
    """Bound on |<eps(v), eps(w)> - exp(<v,w>)| for truncated coherent states."""
    return coherent_tail(v.norm() * w.norm(), nmax)


def coherent_state(v: OneParticleVector, nmax: int, tol: Optional[float] = 1e-8) -> FockState:
    """Truncated eps(v) = sum_n v^n/n!, with amplitudes prod v_i^{k_i}/k_i!.

    Raises ``TruncationTooTight`` when the discarded squared norm exceeds ``tol``.
    """
    if tol is not None:
        tail = coherent_tail(inner_plus(v, v).real, nmax)
        if tail > tol:
            raise TruncationTooTight(f"nmax={nmax} leaves a tail of {tail:.3g} > {tol:.3g}")
    out = {}
    for k in occupation_basis(v.cutoff, nmax):
        amp = 1.0 + 0j
        for vi, ki in zip(v.coeffs, k):
            if ki:
                amp *= vi**ki / math.factorial(ki)
        out[k] = amp
    return FockState(out, v.cutoff, nmax)


def _poly_mul(a: Dict[Occupation, complex], linear: np.ndarray) -> Dict[Occupation, complex]:
    out: Dict[Occupation, complex] = {}
    for k, amp in a.items():
        for i, c in enumerate(linear):
            if c == 0:
                continue
            key = k[:i] + (k[i] + 1,) + k[i + 1:]
            out[key] = out.get(key, 0.0) + c * amp
    return out


def second_quantize_map(T, s: FockState) -> FockState:
    """F(T): each one-particle factor transformed by T (x_j -> sum_i T_ij x_i).

    Images of monomials are memoized: the image of x^k is the image of
    x^(k - e_j) times the j-th transformed variable.
    """
    T = np.asarray(T, dtype=complex)
    if T.shape != (s.modes, s.modes):
        raise CutoffMismatch(f"map of shape {T.shape} on a {s.modes}-mode state")
    zero = (0,) * s.modes
    images: Dict[Occupation, Dict[Occupation, complex]] = {zero: {zero: 1.0}}

    def image(k: Occupation) -> Dict[Occupation, complex]:
        if k not in images:
            j = next(i for i, ki in enumerate(k) if ki)
            images[k] = _poly_mul(image(k[:j] + (k[j] - 1,) + k[j + 1:]), T[:, j])
        return images[k]

    out: Dict[Occupation, complex] = {}
    for k, amp in s.amplitudes.items():
        for key, value in image(k).items():
            out[key] = out.get(key, 0.0) + amp * value
    return FockState(out, s.modes, s.nmax, s.overflow)


def lifted_hamiltonian(omegas: Sequence[float], s: FockState) -> FockState:
    """H_h |n> = (sum n_i omega_i) |n> for h diagonal with eigenvalues omega."""
    omegas = np.asarray(omegas, dtype=float)
    if len(omegas) != s.modes:
        raise CutoffMismatch(f"{len(omegas)} eigenvalues for {s.modes} modes")
    return FockState(
        {k: float(np.dot(k, omegas)) * v for k, v in s.amplitudes.items()}, s.modes, s.nmax, s.overflow
    )


def number_operator(s: FockState) -> FockState:
    return lifted_hamiltonian(np.ones(s.modes), s)


def lifted_evolution(omegas: Sequence[float], t: float, s: FockState) -> FockState:
    """F(exp(-i t h)) for diagonal h."""
    omegas = np.asarray(omegas, dtype=float)
    return FockState(
        {k: np.exp(-1j * t * float(np.dot(k, omegas))) * v for k, v in s.amplitudes.items()},
        s.modes, s.nmax, s.overflow,
    )


def one_particle_evolution(omegas: Sequence[float], t: float, v: OneParticleVector) -> OneParticleVector:
    return OneParticleVector(np.exp(-1j * t * np.asarray(omegas)) * v.coeffs)


def split_state(u: OneParticleVector, parts: Sequence[Sequence[int]]):
    """Restrict u to groups of 0-based mode positions (for the exponential law)."""
    return [OneParticleVector(u.coeffs[list(p)]) for p in parts]


# boundary trace ------------------------------------------------------------------


def trace_weights(table: ModeTable, j: int = 0) -> np.ndarray:
    """Traces of the basis vectors: Xhat_n(j)/sqrt(2 omega_n)."""
    return table.trace_values(j) / np.sqrt(2.0 * table.time_frequencies)


def boundary_trace(v: OneParticleVector, table: ModeTable, j: int = 0) -> complex:
    return complex(np.dot(v.coeffs, trace_weights(table, j)[: v.cutoff]))


@dataclass(frozen=True)
class TraceRate:
    omega0: complex
    rate: float
    trace: complex
    norm_squared: float


def trace_nonunitarity_rate(v0: OneParticleVector, t: float, table: ModeTable, d: DerivedConstants = None) -> TraceRate:
    """omega_0 = gamma_0(h v_t)/gamma_0(v_t) and d/dt ||eps(gamma_0 v_t)||^2.

    v_t = exp(-i t h) v0 with h the time-frequency operator. The boundary
    coherent state has squared norm exp(|z|^2), z = gamma_0(v_t), whose rate
    is 2 exp(|z|^2) |z|^2 Im omega_0.
    """
    freq = table.time_frequencies[: v0.cutoff]
    vt = one_particle_evolution(freq, t, v0)
    z = boundary_trace(vt, table)
    hz = boundary_trace(OneParticleVector(freq * vt.coeffs), table)
    scale = float(np.sum(np.abs(vt.coeffs) * np.abs(trace_weights(table)[: v0.cutoff])))
    if abs(z) <= 1e-14 * max(scale, 1e-300):
        raise TraceVanishes(f"boundary trace vanishes at t={t}")
    omega0 = hz / z
    norm2 = math.exp(abs(z) ** 2)
    return TraceRate(omega0, 2.0 * norm2 * abs(z) ** 2 * omega0.imag, z, norm2)


# factorization ----------------------------------------------------------------


@dataclass(frozen=True)
class FactorizationReport:
    n: np.ndarray              # interval labels of the modes
    coefficients: np.ndarray   # <F, Xtilde_n>_+ for F = (1, 0, 0)
    partial_sums: np.ndarray   # S_N = sum_{k <= N} coefficient^2
    leading: float             # 4 alpha0/(pi mu0)
    harmonic: np.ndarray       # leading * H_N


def boundary_unit_coefficients(table: ModeTable) -> np.ndarray:
    """<F, Xtilde_n>_+ = sqrt(2 alpha0 mu0) omega_n^{3/2}/g_n for F = (1, 0, 0)."""
    d = table.derived
    return math.sqrt(2.0 * d.alpha0 * d.mu0) * table.omegas**1.5 / table.gms


def boundary_unit_coefficient_quadrature(table: ModeTable, index: int, q: Quadrature = DEFAULT_QUADRATURE) -> float:
    """The same coefficient from first principles: sqrt(2 omega) <F, Xhat_n>_mu."""
    from .spectrum import mode_functions

    d = table.derived
    mode = table[index - 1]
    F = MuFunction.boundary_only(1.0, 0.0, d.ell)
    hat = mode_functions(mode, d)[1]
    return math.sqrt(2.0 * mode.omega) * abs(inner_mu(F, hat, d, q))


def factorization_diagnostic(table: ModeTable, d: DerivedConstants = None, N: Optional[int] = None) -> FactorizationReport:
    d = d or table.derived
    if d.mu0 <= 0:
        raise InvalidParams("factorization diagnostic needs mu0 > 0")
    N = len(table) if N is None else N
    coeffs = boundary_unit_coefficients(table)[:N]
    leading = 4.0 * d.alpha0 / (math.pi * d.mu0)
    counts = np.arange(1, N + 1)
    harmonic = leading * np.cumsum(1.0 / counts)
    return FactorizationReport(table.intervals[:N], coeffs, np.cumsum(coeffs**2), leading, harmonic)
