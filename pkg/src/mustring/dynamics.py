"""Classical evolution by mode expansion, energy, and the boundary constraint chain.

Each normalized mode evolves as a harmonic oscillator with time frequency
Omega_m = sqrt(gamma/rho) * omega_m. Momentum is P = rho * dQ/dt.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import InsufficientSmoothness, InvalidLimit, TruncationWarning
from .model import ENDPOINTS, DerivedConstants, StringParams, outward_sign, sigma
from .mu_space import (
    DEFAULT_QUADRATURE,
    MuFunction,
    Quadrature,
    boundary_rn_derivative,
    inner_mu,
    rn_derivative,
    robin_lift,
)
from .spectrum import ModeTable, mode_derivative

TRUNCATION_TOLERANCE = 1e-6


@dataclass(frozen=True)
class CauchyData:
    Q: MuFunction
    P: MuFunction
    expansion: Optional["ModeExpansion"] = None


def _time_derivative(position, velocity, freq, t, order):
    """order-th t-derivative of a cos(Wt) + (b/W) sin(Wt)."""
    phase = freq * t + 0.5 * math.pi * order
    return freq**order * (position * np.cos(phase) + velocity / freq * np.sin(phase))


@dataclass(frozen=True)
class ModeExpansion:
    """Field sum_m T_m(t) Xhat_m(x) with T_m(0) = position[m], dT_m/dt(0) = velocity[m]."""

    table: ModeTable
    position: np.ndarray
    velocity: np.ndarray

    @property
    def derived(self) -> DerivedConstants:
        return self.table.derived

    def amplitudes(self, t: float, t_order: int = 0) -> np.ndarray:
        return _time_derivative(
            self.position, self.velocity, self.table.time_frequencies, t, t_order
        )

    def field(self, t: float, x, x_order: int = 0, t_order: int = 0) -> np.ndarray:
        """Interior values of d^a/dx^a d^b/dt^b Q on the points ``x``."""
        values = self.table.evaluate(x, x_order)
        return self.amplitudes(t, t_order) @ values

    def trace(self, t: float, j: int, x_order: int = 0, t_order: int = 0) -> float:
        x = 0.0 if sigma(j) == 0 else self.derived.ell
        return float(self.field(t, x, x_order, t_order)[0])

    def boundary_value(self, t: float, j: int, t_order: int = 0) -> float:
        return float(self.amplitudes(t, t_order) @ self.table.boundary_values(j))

    def _mu_function(self, amplitudes: np.ndarray, scale: float = 1.0) -> MuFunction:
        table = self.table

        def rule(x, order=0):
            x = np.asarray(x, dtype=float)
            return scale * (amplitudes @ table.evaluate(x.ravel(), order)).reshape(x.shape)

        return MuFunction(
            scale * float(amplitudes @ table.boundary_values(0)),
            scale * float(amplitudes @ table.boundary_values(1)),
            rule,
            self.derived.ell,
            None,
        )

    def cauchy_data(self, t: float) -> CauchyData:
        Q = self._mu_function(self.amplitudes(t))
        P = self._mu_function(self.amplitudes(t, 1), scale=self.derived.rho)
        return CauchyData(Q, P, self.shifted(t))

    def shifted(self, t: float) -> "ModeExpansion":
        """The same solution with its time origin moved to t."""
        return ModeExpansion(self.table, self.amplitudes(t), self.amplitudes(t, 1))

    def energy(self) -> float:
        """Mode-sum energy: sum rho/2 Tdot^2 + gamma/2 omega^2 T^2."""
        d = self.derived
        w = self.table.omegas
        return float(0.5 * d.rho * np.sum(self.velocity**2) + 0.5 * d.gamma * np.sum(w**2 * self.position**2))


def project(f: MuFunction, table: ModeTable, q: Quadrature = DEFAULT_QUADRATURE) -> np.ndarray:
    """Coefficients <Xhat_m, f>_mu for all modes in the table."""
    d = table.derived
    interior = q.integrate(lambda x: table.evaluate(x) * f(x), 0.0, d.ell)
    total = np.array(interior, dtype=float)
    for j in ENDPOINTS:
        if d.alpha(j) != 0.0:
            total = total + d.alpha(j) * f.boundary(j) * table.boundary_values(j)
    return total


def expand(data: CauchyData, table: ModeTable, q: Quadrature = DEFAULT_QUADRATURE) -> ModeExpansion:
    position = project(data.Q, table, q)
    velocity = project(data.P, table, q) / table.derived.rho
    return ModeExpansion(table, position, velocity)


def evolve(
    data: CauchyData, t: float, table: ModeTable, q: Quadrature = DEFAULT_QUADRATURE
) -> CauchyData:
    """Evolve Cauchy data for time t through the first modes of ``table``.

    Warns with ``TruncationWarning`` when more than 1e-6 of the energy (or of
    the L2_mu norm, for data without derivatives) is discarded by the truncation.
    """
    expansion = data.expansion if data.expansion is not None and data.expansion.table is table else None
    if expansion is None:
        expansion = expand(data, table, q)
        fraction = discarded_fraction(data, expansion, q)
        if fraction > TRUNCATION_TOLERANCE:
            warnings.warn(
                f"mode truncation discards a fraction {fraction:.3g} of the data",
                TruncationWarning,
                stacklevel=2,
            )
    return expansion.cauchy_data(t)


def discarded_fraction(data: CauchyData, expansion: ModeExpansion, q: Quadrature = DEFAULT_QUADRATURE) -> float:
    d = expansion.derived
    if data.Q.has_order(1):
        total = energy(data, d, q)
        kept = expansion.energy()
    else:
        total = inner_mu(data.Q, data.Q, d, q) + inner_mu(data.P, data.P, d, q) / d.rho**2
        kept = float(np.sum(expansion.position**2) + np.sum(expansion.velocity**2))
    if total <= 0.0:
        return 0.0
    return max(0.0, (total - kept) / total)


def energy(data: CauchyData, d: DerivedConstants, q: Quadrature = DEFAULT_QUADRATURE) -> float:
    """<P,P>_mu/(2 rho) + gamma/2 <dQ/dmu, dQ/dmu>_mu + gamma/2 sum_j (c_j/alpha_j) Q(j)^2."""
    dQ = rn_derivative(data.Q, d)
    kinetic = inner_mu(data.P, data.P, d, q) / (2.0 * d.rho)
    potential = 0.5 * d.gamma * inner_mu(dQ, dQ, d, q)
    springs = 0.5 * d.gamma * sum(d.c_over_alpha(j) * data.Q.boundary(j) ** 2 for j in ENDPOINTS)
    return float(kinetic + potential + springs)


def physical_energy(data: CauchyData, params: StringParams, q: Quadrature = DEFAULT_QUADRATURE) -> float:
    """String energy in physical variables, using traces for the endpoint masses and springs."""
    rho, gamma = params.rho, params.gamma
    ell = params.ell
    kinetic = q.integrate(lambda x: data.P(x) ** 2, 0.0, ell) / (2 * rho)
    strain = 0.5 * gamma * q.integrate(lambda x: data.Q(x, 1) ** 2, 0.0, ell)
    ends = sum(
        0.5 * params.mass(j) * (data.P.trace(j) / rho) ** 2 + 0.5 * params.spring(j) * data.Q.trace(j) ** 2
        for j in ENDPOINTS
    )
    return float(kinetic + strain + ends)


# initial data -----------------------------------------------------------------


def gaussian_data(d: DerivedConstants, center=None, width=0.1, amplitude=1.0) -> CauchyData:
    """Gaussian bump in Q with P = 0, lifted into the Robin domain."""
    ell = d.ell
    c = 0.5 * ell if center is None else center
    s = width * ell

    def rule(x, order=0):
        z = (np.asarray(x, dtype=float) - c) / s
        # Hermite polynomials give the derivatives of exp(-z^2/2)
        coeffs = np.zeros(order + 1)
        coeffs[order] = 1.0
        herm = np.polynomial.hermite_e.hermeval(z, coeffs)
        return amplitude * (-1.0 / s) ** order * herm * np.exp(-0.5 * z**2)

    Q = robin_lift(MuFunction(0.0, 0.0, rule, ell, None), d)
    zero = MuFunction.boundary_only(0.0, 0.0, ell)
    return CauchyData(Q, zero)


def mode_data(table: ModeTable, positions: dict, velocities: Optional[dict] = None) -> CauchyData:
    """Cauchy data with the given mode amplitudes, keyed by ordinal mode index (1-based)."""
    position = np.zeros(len(table))
    velocity = np.zeros(len(table))
    for index, value in positions.items():
        position[index - 1] = value
    for index, value in (velocities or {}).items():
        velocity[index - 1] = value
    return ModeExpansion(table, position, velocity).cauchy_data(0.0)


# residuals ------------------------------------------------------------------


def boundary_ode_residual(field: ModeExpansion, j: int, t: float, params: StringParams) -> float:
    """m_j Qtt(t,j) + k_j Q(t,j) + (-1)**(sigma(j)+1) gamma Q'(t,j), evaluated on traces."""
    return (
        params.mass(j) * field.trace(t, j, t_order=2)
        + params.spring(j) * field.trace(t, j)
        + outward_sign(j) * params.gamma * field.trace(t, j, x_order=1)
    )


def interior_wave_residual(field: ModeExpansion, t: float, x) -> np.ndarray:
    """rho Qtt - gamma Q'' on the points x."""
    d = field.derived
    return d.rho * field.field(t, x, t_order=2) - d.gamma * field.field(t, x, x_order=2)


@dataclass(frozen=True)
class EndpointData:
    """Endpoint positions q_j, momenta p_j and multipliers lambda_j (None: eliminate from the field)."""

    q: Optional[Sequence[float]] = None
    p: Optional[Sequence[float]] = None
    lam: Optional[Sequence[float]] = None


@dataclass(frozen=True)
class ConstraintChain:
    c1: tuple
    c2: tuple
    c3: tuple
    position_chain: np.ndarray   # [endpoint, k] residual of C4 applied to d^{2k}Q/dx^{2k}
    momentum_chain: np.ndarray   # same with P
    position_scale: np.ndarray   # sum of absolute term sizes, for relative residuals
    momentum_scale: np.ndarray

    @property
    def relative_chain(self) -> np.ndarray:
        def rel(res, scale):
            with np.errstate(invalid="ignore", divide="ignore"):
                return np.where(scale > 0, np.abs(res) / np.where(scale > 0, scale, 1.0), 0.0)

        return np.stack([rel(self.position_chain, self.position_scale), rel(self.momentum_chain, self.momentum_scale)])

    @property
    def max_relative(self) -> float:
        return float(np.max(self.relative_chain))


def _chain_terms(F: MuFunction, j: int, k: int, params: StringParams):
    """The three terms of C4 applied to the 2k-th derivative of F at endpoint j."""
    rho, gamma = params.rho, params.gamma
    m, spring, eps = params.mass(j), params.spring(j), params.coupling(j)
    s = outward_sign(j)
    if m > 0:
        return (
            gamma / rho * F.trace(j, 2 * k + 2),
            s * eps**2 * gamma / m * F.trace(j, 2 * k + 1),
            eps * spring / m * F.trace(j, 2 * k),
        )
    # massless endpoint: the condition multiplied through by m_j
    return (0.0, s * eps**2 * gamma * F.trace(j, 2 * k + 1), eps * spring * F.trace(j, 2 * k))


def constraint_chain(
    data: CauchyData,
    K: int,
    params: StringParams,
    d: DerivedConstants,
    endpoint: Optional[EndpointData] = None,
) -> ConstraintChain:
    """Residuals C1..C3 and the C4 chain up to order K at both endpoints.

    Endpoint variables not supplied in ``endpoint`` are eliminated through
    C1..C3 (q_j = Q(j)/eps_j, p_j = m_j P(j)/rho, lambda_j from Q'(j)).
    """
    need = 2 * K + 2
    for name, F in (("Q", data.Q), ("P", data.P)):
        if not F.has_order(need):
            raise InsufficientSmoothness(f"{name} needs {need} interior derivatives for K={K}")
    endpoint = endpoint or EndpointData()
    rho, gamma = params.rho, params.gamma
    c1, c2, c3 = [], [], []
    pos = np.zeros((2, K + 1))
    mom = np.zeros((2, K + 1))
    pos_scale = np.zeros((2, K + 1))
    mom_scale = np.zeros((2, K + 1))
    for j in ENDPOINTS:
        eps, m = params.coupling(j), params.mass(j)
        Qj, Pj, dQj = data.Q.trace(j), data.P.trace(j), data.Q.trace(j, 1)
        q_j = endpoint.q[j] if endpoint.q is not None else (Qj / eps if eps else 0.0)
        p_j = endpoint.p[j] if endpoint.p is not None else (m * Pj / rho / eps if eps else 0.0)
        lam_j = endpoint.lam[j] if endpoint.lam is not None else outward_sign(j) * gamma * dQj
        c1.append(lam_j - gamma * outward_sign(j) * dQj)
        c2.append(Qj - eps * q_j)
        c3.append(Pj / rho - eps * p_j / m if m > 0 else -eps * p_j)
        for k in range(K + 1):
            terms = _chain_terms(data.Q, j, k, params)
            pos[j, k] = sum(terms)
            pos_scale[j, k] = sum(abs(v) for v in terms)
            terms = _chain_terms(data.P, j, k, params)
            mom[j, k] = sum(terms)
            mom_scale[j, k] = sum(abs(v) for v in terms)
    return ConstraintChain(tuple(c1), tuple(c2), tuple(c3), pos, mom, pos_scale, mom_scale)


# two-mass limit ---------------------------------------------------------------


@dataclass(frozen=True)
class TwoMassTrajectory:
    t: np.ndarray
    left: np.ndarray
    right: np.ndarray
    omega: float


def two_mass_frequency(params: StringParams) -> float:
    """sqrt(gamma/(mu ell)) with mu the reduced mass; gamma/ell is the spring constant of the massless string."""
    reduced = params.m0 * params.ml / (params.m0 + params.ml)
    return math.sqrt(params.gamma / (reduced * params.ell))


def two_mass_limit(params: StringParams, ic: Sequence[float], t) -> TwoMassTrajectory:
    """Closed-form endpoint motion of a massless string (rho = 0, no springs) joining two masses.

    ``ic`` is (Q(0,0), Q(0,ell), Qdot(0,0), Qdot(0,ell)).
    """
    if params.rho != 0.0:
        raise InvalidLimit("two-mass limit requires rho = 0")
    if params.k0 != 0.0 or params.kl != 0.0:
        raise InvalidLimit("two-mass limit requires k0 = kl = 0")
    if not (params.m0 > 0 and params.ml > 0):
        raise InvalidLimit("two-mass limit requires positive endpoint masses")
    if not (params.gamma > 0 and params.ell > 0):
        raise InvalidLimit("gamma and ell must be positive")
    q0, ql, v0, vl = (float(v) for v in ic)
    m0, ml = params.m0, params.ml
    total = m0 + ml
    reduced = m0 * ml / total
    omega = two_mass_frequency(params)
    t = np.asarray(t, dtype=float)
    com = (m0 * q0 + ml * ql) / total + t * (m0 * v0 + ml * vl) / total
    stretch = (ql - q0) * np.cos(omega * t) + (vl - v0) * np.sin(omega * t) / omega
    left = com - reduced / m0 * stretch
    right = com + reduced / ml * stretch
    return TwoMassTrajectory(t, left, right, omega)
