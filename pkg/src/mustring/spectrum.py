"""Transcendental eigenproblem of the string with endpoint masses and springs.

Modes are X(x) = A sin(wx) + B cos(wx) with A = r0 - mu0 w^2 and B = w.
Each interval I_m = [m pi/ell, (m+1) pi/ell) holds exactly one frequency,
except the interval containing the pole w* = sqrt((r0+rl)/(mu0+mul)),
which holds two. A mode records both its ordinal ``index`` (1-based) and
the ``interval`` m it lies in; asymptotic formulas are in terms of m.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import BracketFailure, InvalidParams
from .model import ENDPOINTS, DerivedConstants, sigma
from .mu_space import DEFAULT_QUADRATURE, MuFunction, Quadrature, composite_nodes, inner_mu

SUBGRID = 64
BISECTION_STEPS = 80
NEWTON_STEPS = 5


def frequency_equation(omega, d: DerivedConstants):
    """(w^2 (mu0+mul) - (r0+rl)) w cos(w ell) - ((mu0 w^2 - r0)(mul w^2 - rl) - w^2) sin(w ell)."""
    w = np.asarray(omega, dtype=float)
    total_mass = d.mu0 + d.mul
    total_spring = d.r0 + d.rl
    poly = (d.mu0 * w**2 - d.r0) * (d.mul * w**2 - d.rl) - w**2
    return (w**2 * total_mass - total_spring) * w * np.cos(w * d.ell) - poly * np.sin(w * d.ell)


def frequency_equation_derivative(omega, d: DerivedConstants):
    w = np.asarray(omega, dtype=float)
    total_mass = d.mu0 + d.mul
    total_spring = d.r0 + d.rl
    lead = w**2 * total_mass - total_spring
    poly = (d.mu0 * w**2 - d.r0) * (d.mul * w**2 - d.rl) - w**2
    dpoly = 2 * w * (d.mu0 * (d.mul * w**2 - d.rl) + d.mul * (d.mu0 * w**2 - d.r0) - 1.0)
    c, s = np.cos(w * d.ell), np.sin(w * d.ell)
    return (3 * w**2 * total_mass - total_spring) * c - lead * w * d.ell * s - dpoly * s - poly * d.ell * c


def pole_frequency(d: DerivedConstants) -> Optional[float]:
    """w* where w^2 (mu0+mul) = r0+rl, or None without endpoint masses."""
    total_mass = d.mu0 + d.mul
    if total_mass == 0.0:
        return None
    return math.sqrt((d.r0 + d.rl) / total_mass)


def exceptional_interval(d: DerivedConstants) -> Optional[int]:
    star = pole_frequency(d)
    if star is None or not math.isfinite(star * d.ell):
        return None
    return int(math.floor(star * d.ell / math.pi + 1e-9))


def exceptional_is_endpoint(d: DerivedConstants) -> bool:
    """True when m0 = (ell/pi) w* is a natural number (to 1e-9): then w* itself is a root."""
    star = pole_frequency(d)
    if star is None:
        return False
    m0 = star * d.ell / math.pi
    return m0 > 0.5 and abs(m0 - round(m0)) < 1e-9


def bisect_newton(f, fprime, lo: np.ndarray, hi: np.ndarray):
    """Vectorized bisection followed by guarded Newton polishing.

    Every bracket [lo, hi] must carry a sign change.
    """
    lo = np.array(lo, dtype=float)
    hi = np.array(hi, dtype=float)
    flo = f(lo)
    for _ in range(BISECTION_STEPS):
        mid = 0.5 * (lo + hi)
        fmid = f(mid)
        left = np.sign(fmid) == np.sign(flo)
        lo = np.where(left, mid, lo)
        flo = np.where(left, fmid, flo)
        hi = np.where(left, hi, mid)
        if np.all(hi - lo <= 1e-13 * np.maximum(np.abs(hi), 1e-300)):
            break
    root = 0.5 * (lo + hi)
    a, b = lo - (hi - lo), hi + (hi - lo)
    for _ in range(NEWTON_STEPS):
        value = f(root)
        slope = fprime(root)
        with np.errstate(divide="ignore", invalid="ignore"):
            step = np.where(slope != 0, value / slope, 0.0)
        candidate = root - step
        accept = (candidate >= a) & (candidate <= b) & (np.abs(f(candidate)) <= np.abs(value))
        root = np.where(accept, candidate, root)
    return root


def _sign_change_brackets(f, lo: float, hi: float, points: int, extra=()):
    grid = np.unique(np.concatenate([np.linspace(lo, hi, points + 1), np.asarray(extra, float)]))
    values = f(grid)
    brackets = []
    for a, b, fa, fb in zip(grid[:-1], grid[1:], values[:-1], values[1:]):
        if fa == 0.0:
            brackets.append((a, a))
        elif fa * fb < 0:
            brackets.append((a, b))
    return brackets


def interval_roots(d: DerivedConstants, intervals: Sequence[int]):
    """All roots in the listed intervals I_m, as (interval, omega) pairs in increasing order."""
    width = math.pi / d.ell
    if d.r0 + d.rl == 0.0:
        if d.mu0 + d.mul > 0.0:
            raise InvalidParams("free ends with masses need at least one positive spring constant")
        return _neumann_roots(d, intervals)
    star = pole_frequency(d)
    special = exceptional_interval(d)
    on_endpoint = exceptional_is_endpoint(d)
    f = lambda w: frequency_equation(w, d)
    fp = lambda w: frequency_equation_derivative(w, d)
    nudge = 1e-9 * width

    intervals = list(intervals)
    regular = [m for m in intervals if m != special and not (on_endpoint and m == special - 1)]
    found = []
    if regular:
        m = np.asarray(regular, dtype=float)
        lo = np.where(m == 0, nudge, m * width)
        hi = (m + 1) * width
        flo, fhi = f(lo), f(hi)
        bad = flo * fhi > 0
        exact_lo = flo == 0
        if np.any(bad & ~exact_lo):
            # fall back to a subgrid scan for the odd interval out
            for idx in np.flatnonzero(bad & ~exact_lo):
                found.extend(_scan_interval(d, int(m[idx]), expected=1))
        good = ~bad | exact_lo
        roots = np.where(exact_lo, lo, bisect_newton(f, fp, lo, hi))
        found.extend((int(mm), float(w)) for mm, w, ok in zip(m, roots, good) if ok)
    if special is not None:
        if on_endpoint:
            if special in intervals:
                found.append((special, special * width))
                found.extend(_scan_interval(d, special, expected=1, lo_offset=True))
            if special - 1 in intervals and special - 1 >= 0:
                found.extend(_scan_interval(d, special - 1, expected=1))
        elif special in intervals:
            found.extend(_scan_interval(d, special, expected=2, split=star))
    found.sort(key=lambda item: item[1])
    return found


def _neumann_roots(d: DerivedConstants, intervals: Sequence[int]):
    """Free ends without masses: roots sit on the interval edges m pi/ell.

    Each is bracketed on the half-shifted interval around it. The zero
    frequency (the constant mode) is not returned.
    """
    width = math.pi / d.ell
    m = np.asarray([k for k in intervals if k >= 1], dtype=float)
    if m.size == 0:
        return []
    roots = bisect_newton(
        lambda w: frequency_equation(w, d),
        lambda w: frequency_equation_derivative(w, d),
        (m - 0.5) * width,
        (m + 0.5) * width,
    )
    return [(int(k), float(w)) for k, w in zip(m, roots)]


def _scan_interval(d, m, expected, split=None, lo_offset=False):
    width = math.pi / d.ell
    lo = m * width if m > 0 else 1e-9 * width
    hi = (m + 1) * width
    if lo_offset:
        lo += 1e-9 * width
    f = lambda w: frequency_equation(w, d)
    fp = lambda w: frequency_equation_derivative(w, d)
    extra = () if split is None else (split,)
    for points in (SUBGRID, 8 * SUBGRID, 64 * SUBGRID):
        brackets = _sign_change_brackets(f, lo, hi, points, extra)
        brackets = [br for br in brackets if br[0] < hi]
        if len(brackets) == expected:
            break
    else:
        raise BracketFailure(
            f"expected {expected} sign change(s), found {len(brackets)}",
            interval=(m * width, hi),
        )
    roots = []
    for a, b in brackets:
        w = a if a == b else float(bisect_newton(f, fp, [a], [b])[0])
        roots.append((m, w))
    return roots


def normalization_squared(omega, d: DerivedConstants):
    """Closed form of g_m^2 = <<X_m, X_m>> for X_m = (r0 - mu0 w^2) sin(wx) + w cos(wx)."""
    w = np.asarray(omega, dtype=float)
    left = d.mu0 * w**2 - d.r0
    right = d.mul * w**2 - d.rl
    return 0.5 * (
        d.r0
        + (d.ell + d.mu0) * w**2
        + left**2 * d.ell
        + (d.mul * w**2 + d.rl) * (w**2 + left**2) / (w**2 + right**2)
    )


def mode_derivative(A, B, omega, x, order: int = 0):
    """order-th x-derivative of A sin(wx) + B cos(wx); broadcasts over modes and points."""
    phase = omega * x + 0.5 * math.pi * order
    return omega**order * (A * np.sin(phase) + B * np.cos(phase))


@dataclass(frozen=True)
class Mode:
    index: int
    interval: int
    omega: float
    A: float
    B: float
    gm: float
    boundary0: float
    boundaryl: float
    trace0: float
    tracel: float

    @property
    def m(self) -> int:
        return self.index

    def boundary(self, j: int) -> float:
        return (self.boundary0, self.boundaryl)[sigma(j)]

    def trace(self, j: int) -> float:
        return (self.trace0, self.tracel)[sigma(j)]

    def classical(self, x, order: int = 0):
        """Unnormalized X_m."""
        return mode_derivative(self.A, self.B, self.omega, x, order)


def build_mode(index: int, interval: int, omega: float, d: DerivedConstants) -> Mode:
    A = d.r0 - d.mu0 * omega**2
    B = omega
    gm = math.sqrt(float(normalization_squared(omega, d)))
    trace0 = B / gm
    tracel = float(mode_derivative(A, B, omega, d.ell)) / gm
    return Mode(
        index=index, interval=interval, omega=float(omega), A=A, B=B, gm=gm,
        boundary0=d.boundary_factor(0) * trace0,
        boundaryl=d.boundary_factor(1) * tracel,
        trace0=trace0, tracel=tracel,
    )


@dataclass(frozen=True)
class ModeTable:
    derived: DerivedConstants
    modes: tuple
    cutoff: int
    exceptional: Optional[int] = None

    def __len__(self):
        return len(self.modes)

    def __getitem__(self, i):
        return self.modes[i]

    def __iter__(self):
        return iter(self.modes)

    @property
    def omegas(self) -> np.ndarray:
        return np.array([m.omega for m in self.modes])

    @property
    def time_frequencies(self) -> np.ndarray:
        """Omega_m = sqrt(gamma/rho) * omega_m."""
        return self.derived.wave_speed * self.omegas

    @property
    def gms(self) -> np.ndarray:
        return np.array([m.gm for m in self.modes])

    @property
    def intervals(self) -> np.ndarray:
        return np.array([m.interval for m in self.modes])

    def boundary_values(self, j: int) -> np.ndarray:
        return np.array([m.boundary(j) for m in self.modes])

    def trace_values(self, j: int) -> np.ndarray:
        return np.array([m.trace(j) for m in self.modes])

    def evaluate(self, x, order: int = 0, count: Optional[int] = None) -> np.ndarray:
        """Matrix [mode, point] of the order-th derivative of the normalized modes."""
        modes = self.modes[:count]
        A = np.array([m.A / m.gm for m in modes])[:, None]
        B = np.array([m.B / m.gm for m in modes])[:, None]
        w = np.array([m.omega for m in modes])[:, None]
        return mode_derivative(A, B, w, np.atleast_1d(np.asarray(x, dtype=float))[None, :], order)

    def truncated(self, count: int) -> "ModeTable":
        return ModeTable(self.derived, self.modes[:count], self.cutoff, self.exceptional)


def find_modes(d: DerivedConstants, M: int) -> ModeTable:
    """Frequencies in the intervals I_0 .. I_{M-1}: M modes, or M+1 with the double-root interval."""
    if M < 1:
        raise InvalidParams("mode cutoff must be at least 1")
    roots = interval_roots(d, range(M))
    modes = tuple(build_mode(i + 1, m, w, d) for i, (m, w) in enumerate(roots))
    special = exceptional_interval(d)
    return ModeTable(d, modes, M, special if special is not None and special < M else None)


def first_modes(d: DerivedConstants, count: int) -> ModeTable:
    """The lowest ``count`` modes (the interval cutoff is chosen to cover them)."""
    table = find_modes(d, count)
    return ModeTable(d, table.modes[:count], table.cutoff, table.exceptional)


def mode_functions(mode: Mode, d: DerivedConstants):
    """(X_m, normalized X_m) as MuFunctions.

    X_m carries its traces as boundary values; the normalized mode has
    interior X_m/g_m and boundary values (1 - alpha_j r_j) X_m(j)/g_m.
    """

    def raw(x, order=0):
        return mode_derivative(mode.A, mode.B, mode.omega, x, order)

    def normalized(x, order=0):
        return raw(x, order) / mode.gm

    classical = MuFunction(mode.trace0 * mode.gm, mode.tracel * mode.gm, raw, d.ell, None)
    hat = MuFunction(mode.boundary0, mode.boundaryl, normalized, d.ell, None)
    return classical, hat


def normalization_gm(mode: Mode, d: DerivedConstants) -> float:
    return math.sqrt(float(normalization_squared(mode.omega, d)))


def asymptotic_frequency(m, d: DerivedConstants):
    """Leading large-m behaviour of the frequency in interval I_m.

    Both masses: m pi/ell + (mu0+mul)/(mu0 mul pi m).
    One mass: (2m+1) pi/(2 ell) + 2/(mu pi (2m+1)).
    No masses: m pi/ell + (r0+rl)/(pi m).
    """
    m = np.asarray(m, dtype=float)
    ell = d.ell
    if d.mu0 > 0 and d.mul > 0:
        return m * math.pi / ell + (d.mu0 + d.mul) / (d.mu0 * d.mul * math.pi * m)
    if d.mu0 > 0 or d.mul > 0:
        mu = d.mu0 + d.mul
        return (2 * m + 1) * math.pi / (2 * ell) + 2.0 / (mu * math.pi * (2 * m + 1))
    return m * math.pi / ell + (d.r0 + d.rl) / (math.pi * m)


def asymptotic_inverse_gm(m, d: DerivedConstants):
    """1/g_m ~ sqrt(2) ell^{3/2} / (mu0 pi^2 m^2)."""
    m = np.asarray(m, dtype=float)
    return math.sqrt(2.0) * d.ell**1.5 / (d.mu0 * math.pi**2 * m**2)


@dataclass(frozen=True)
class CompletenessReport:
    counts: np.ndarray
    left_weight: np.ndarray      # alpha0 * sum X(0)^2, target 1
    right_weight: np.ndarray     # alphal * sum X(ell)^2, target 1
    cross: np.ndarray            # sum X(0) X(ell), target 0
    mixed: np.ndarray            # sup_x |sum X(0) X(x)| over an interior grid, target 0
    expansion_residual: np.ndarray  # L2 error of the interior expansion of x(ell-x)
    tail_left: np.ndarray        # predicted 1 - left_weight from the 1/m^2 tail
    tail_right: np.ndarray


def tail_estimate(last_interval, mu: float, ell: float):
    """Predicted remainder alpha_j sum X(j)^2 over intervals beyond ``last_interval``.

    The summand behaves like 2 ell/(mu pi^2 m^2), and sum_{m>M} 1/m^2 ~ 1/(M + 1/2).
    """
    return 2.0 * ell / (mu * math.pi**2 * (np.asarray(last_interval, dtype=float) + 0.5))


def tail_interval(tol: float, mu: float, ell: float) -> int:
    """Smallest last interval M whose predicted tail is at most ``tol``."""
    return max(0, int(math.ceil(2.0 * ell / (mu * math.pi**2 * tol) - 0.5)))


def tail_cutoff(tol: float, d: DerivedConstants, mu: Optional[float] = None) -> int:
    """Number of modes covering intervals I_0 .. I_M with M from ``tail_interval``.

    The double-root interval contributes two modes.
    """
    mu = min(x for x in (d.mu0, d.mul) if x > 0) if mu is None else mu
    M = tail_interval(tol, mu, d.ell)
    special = exceptional_interval(d)
    extra = 1 if special is not None and special <= M and not exceptional_is_endpoint(d) else 0
    return M + 1 + extra


def completeness_identities(
    table: ModeTable,
    N: int,
    counts: Optional[Sequence[int]] = None,
    q: Quadrature = DEFAULT_QUADRATURE,
) -> CompletenessReport:
    d = table.derived
    if N > len(table):
        raise InvalidParams(f"N={N} exceeds table size {len(table)}")
    counts = np.asarray(counts if counts is not None else [N], dtype=int)
    b0 = table.boundary_values(0)[:N]
    bl = table.boundary_values(1)[:N]
    left = d.alpha0 * np.cumsum(b0**2)
    right = d.alphal * np.cumsum(bl**2)
    cross = np.cumsum(b0 * bl)
    x = np.linspace(0.05, 0.95, 19) * d.ell
    values = table.evaluate(x, count=N)
    mixed = np.max(np.abs(np.cumsum(b0[:, None] * values, axis=0)), axis=1)

    # interior expansion of f(x) = x (ell - x), seen as (0, f, 0) in L2_mu
    f = MuFunction.from_callables(lambda s: s * (d.ell - s), 0.0, 0.0, d.ell)
    norm2 = inner_mu(f, f, d, q)
    nodes, weights = _nodes(d.ell, N)
    coeffs = table.evaluate(nodes, count=N) @ (weights * nodes * (d.ell - nodes))
    residual = np.sqrt(np.maximum(norm2 - np.cumsum(coeffs**2), 0.0))

    idx = counts - 1
    last = table.intervals[idx]
    tail = lambda mu: tail_estimate(last, mu, d.ell) if mu > 0 else np.zeros(len(counts))
    return CompletenessReport(
        counts=counts,
        left_weight=left[idx], right_weight=right[idx], cross=cross[idx],
        mixed=mixed[idx], expansion_residual=residual[idx],
        tail_left=tail(d.mu0), tail_right=tail(d.mul),
    )


def _nodes(ell, N):
    panels = max(8, int(N // 2) + 8)
    return composite_nodes(0.0, ell, panels)
