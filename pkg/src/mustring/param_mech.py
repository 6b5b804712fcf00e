"""Parametrized classical mechanics: a particle with its time promoted to a variable.

On the primary constraint surface the state is (q, t, p), with the momentum
of t fixed to pi = -H(q, p) and H = p^2/2m + W(q). The Hamiltonian vector
fields are Y = N (p/m, 1, -W'(q)) for an arbitrary lapse N; orbits are gauge
orbits, and fixing t = tau gives canonical coordinates (q_tau, p_tau).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy.interpolate import CubicHermiteSpline
from scipy.optimize import brentq

from .errors import InvalidParams, NoCrossing, StepFailure


@dataclass(frozen=True)
class Potential:
    W: Callable[[np.ndarray], np.ndarray]
    dW: Callable[[np.ndarray], np.ndarray]
    name: str = "potential"


def free() -> Potential:
    return Potential(lambda q: 0.0 * q, lambda q: 0.0 * q, "free")


def harmonic(k: float = 1.0) -> Potential:
    return Potential(lambda q: 0.5 * k * q**2, lambda q: k * q, f"harmonic:{k}")


def quartic(lam: float = 1.0) -> Potential:
    return Potential(lambda q: 0.25 * lam * q**4, lambda q: lam * q**3, f"quartic:{lam}")


@dataclass(frozen=True)
class Lapse:
    """N(s, state); ``definite`` records whether the lapse never vanishes."""

    rule: Callable[[float, np.ndarray], float]
    definite: bool = True
    name: str = "lapse"

    def __call__(self, s: float, state: np.ndarray) -> float:
        return self.rule(s, state)


def constant_lapse(c: float = 1.0) -> Lapse:
    return Lapse(lambda s, y: c, c != 0.0, f"const:{c}")


def oscillating_lapse(a: float = 0.5) -> Lapse:
    """N(s) = 1 + a sin(s); sign-definite for |a| < 1."""
    return Lapse(lambda s, y: 1.0 + a * math.sin(s), abs(a) < 1.0, f"osc:{a}")


def _preset(spec: str, table: dict, kind: str):
    name, _, arg = spec.partition(":")
    if name not in table:
        raise InvalidParams(f"unknown {kind} preset {name!r}")
    try:
        return table[name](*([float(arg)] if arg else []))
    except ValueError:
        raise InvalidParams(f"bad {kind} argument {arg!r}") from None


def potential_preset(spec: str) -> Potential:
    """``free``, ``harmonic[:k]`` or ``quartic[:lambda]``."""
    return _preset(spec, {"free": free, "harmonic": harmonic, "quartic": quartic}, "potential")


def lapse_preset(spec: str) -> Lapse:
    """``const[:c]`` or ``osc[:a]``."""
    return _preset(spec, {"const": constant_lapse, "osc": oscillating_lapse}, "lapse")


def hamiltonian_field(state, N: float, W: Potential, m: float = 1.0) -> np.ndarray:
    """(Y_q, Y_t, Y_p) = N (p/m, 1, -W'(q)) at state = (q, t, p)."""
    q, _, p = state
    return N * np.array([p / m, 1.0, -float(W.dW(q))])


def momentum_of_time(state, W: Potential, m: float = 1.0) -> float:
    """pi = -H(q, p) on the constraint surface."""
    q, _, p = state
    return -(p**2 / (2 * m) + float(W.W(q)))


@dataclass(frozen=True)
class Trajectory:
    s: np.ndarray
    states: np.ndarray        # rows (q, t, p)
    velocities: np.ndarray    # rows (Y_q, Y_t, Y_p)
    m: float
    potential: Potential

    @property
    def q(self):
        return self.states[:, 0]

    @property
    def t(self):
        return self.states[:, 1]

    @property
    def p(self):
        return self.states[:, 2]


def integrate_orbit(state0, N: Lapse, W: Potential, s_span=(0.0, 10.0), steps: int = 10_000, m: float = 1.0) -> Trajectory:
    """Classical fixed-step RK4 along the lapse-scaled Hamiltonian field."""
    if steps < 1:
        raise InvalidParams("steps must be positive")
    s0, s1 = s_span
    h = (s1 - s0) / steps

    def rhs(s, y):
        return hamiltonian_field(y, N(s, y), W, m)

    s = s0 + h * np.arange(steps + 1)
    states = np.empty((steps + 1, 3))
    velocities = np.empty((steps + 1, 3))
    y = np.asarray(state0, dtype=float)
    states[0] = y
    velocities[0] = rhs(s0, y)
    # overflow surfaces as a non-finite state and is reported as StepFailure
    with np.errstate(over="ignore", invalid="ignore"):
        for i in range(steps):
            si = s[i]
            k1 = velocities[i]
            k2 = rhs(si + h / 2, y + h / 2 * k1)
            k3 = rhs(si + h / 2, y + h / 2 * k2)
            k4 = rhs(si + h, y + h * k3)
            y = y + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
            if not np.all(np.isfinite(y)):
                raise StepFailure(f"non-finite state at s={s[i + 1]:.6g}")
            states[i + 1] = y
            velocities[i + 1] = rhs(s[i + 1], y)
    return Trajectory(s, states, velocities, m, W)


def gauge_fix(traj: Trajectory, tau: float):
    """(q, p) where the orbit crosses t = tau.

    The crossing step is found on the sampled clock and refined by cubic
    Hermite interpolation in s, which matches the RK4 order.
    """
    t = traj.t
    below = t - tau
    hits = np.nonzero(below[:-1] * below[1:] <= 0)[0]
    moving = [i for i in hits if t[i] != t[i + 1]]
    if not moving:
        raise NoCrossing(f"orbit does not reach t={tau} (t in [{t.min():.6g}, {t.max():.6g}])")
    i = moving[0]
    window = slice(i, i + 2)
    s = traj.s[window]
    spline = CubicHermiteSpline(s, traj.states[window], traj.velocities[window])
    if below[i] == 0.0:
        s_star = s[0]
    elif below[i + 1] == 0.0:
        s_star = s[1]
    else:
        s_star = brentq(lambda x: spline(x)[1] - tau, s[0], s[1], xtol=1e-15, rtol=4 * np.finfo(float).eps)
    q, _, p = spline(s_star)
    return float(q), float(p)


def observable(point, kind: str, W: Potential, m: float = 1.0) -> float:
    """``energy``: p^2/2m + W(q), constant along orbits; ``projection``: q_tau."""
    q, p = point
    if kind == "energy":
        return p**2 / (2 * m) + float(W.W(q))
    if kind == "projection":
        return q
    raise InvalidParams(f"unknown observable {kind!r}")


def curve_in_time(traj: Trajectory, times: np.ndarray) -> np.ndarray:
    """(q, p) at each clock value, by gauge fixing."""
    return np.array([gauge_fix(traj, tau) for tau in times])


def zero_energy_residual(traj: Trajectory) -> np.ndarray:
    """E = p v + pi tau_dot - L with L = m v^2/(2 tau_dot) - tau_dot W(q); zero on orbits.

    Velocities are taken from the field, v = Y_q, tau_dot = Y_t, and p is
    reconstructed from them as m v/tau_dot.
    """
    m = traj.m
    q = traj.q
    v = traj.velocities[:, 0]
    tdot = traj.velocities[:, 1]
    W = traj.potential.W(q)
    p = m * v / tdot
    pi = -(m * v**2 / (2 * tdot**2) + W)
    lagrangian = m * v**2 / (2 * tdot) - tdot * W
    return p * v + pi * tdot - lagrangian


def tangency_residual(traj: Trajectory) -> np.ndarray:
    """Y_pi = -(p/m) Y_p - W'(q) Y_q, the change of pi = -H along the field; zero on orbits."""
    Yq, Yp = traj.velocities[:, 0], traj.velocities[:, 2]
    return -(traj.p / traj.m) * Yp - traj.potential.dW(traj.q) * Yq


def euler_lagrange_residual(traj: Trajectory) -> np.ndarray:
    """m d/ds(q_dot/t_dot) + t_dot W'(q), with the s-derivative from finite differences."""
    ratio = traj.velocities[:, 0] / traj.velocities[:, 1]
    d_ratio = np.gradient(ratio, traj.s, edge_order=2)
    return traj.m * d_ratio + traj.velocities[:, 1] * traj.potential.dW(traj.q)
