"""Bogoliubov coefficients between space-like embeddings for the massless string.

The field obeys phi_tt = phi_xx on [0, ell] with Dirichlet or Robin ends,
X'(j) = (-1)**sigma(j) r_j X(j), and no endpoint masses. Modes are written
with exponentials,

    X_k(x) = (alpha_k^{0+} e^{i w x} + alpha_k^{0-} e^{-i w x}) / c_k,

with alpha^{j+} = w - i r_j (Robin) or -i/2 (Dirichlet) and alpha^- = conj(alpha^+).
Solutions phi^+_k = e^{-i w t} X_k and phi^- = conj(phi^+). An embedding is
sigma -> (t(sigma), x(sigma)), and the momentum of a solution along it is
p = x' d_t phi + t' d_x phi.

The evolution map T takes the Cauchy data of a solution on X_I and builds
the solution with the same data on X_F. With the pairing

    <<phi1, phi2>> = i int [conj(phi1) p2 - phi2 conj(p1)] dsigma,

T phi^+_n = sum_m gamma_nm phi^+_m + conj(beta_nm) phi^-_m, so that the
labels transform as a^F_m = sum_n gamma_nm a^I_n + beta_nm conj(a^I_n).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import brentq

from .errors import BracketFailure, InvalidParams, NotSpacelike, QuadratureFailure
from .mu_space import composite_nodes

SLOPE_TOL = 1e-10
# partial sums below this are round-off, not evidence of mixing
NOISE_FLOOR = 1e-20


# boundary conditions and modes ----------------------------------------------------


@dataclass(frozen=True)
class EndCondition:
    """Dirichlet (``r=None``) or Robin with coefficient ``r`` at one endpoint."""

    r: Optional[float] = None

    @property
    def dirichlet(self) -> bool:
        return self.r is None

    def alpha_plus(self, omega):
        if self.dirichlet:
            return -0.5j + 0.0 * np.asarray(omega)
        return np.asarray(omega) - 1j * self.r


DIRICHLET = EndCondition(None)


@dataclass(frozen=True)
class FieldBC:
    left: EndCondition
    right: EndCondition
    ell: float = 1.0

    @classmethod
    def dirichlet(cls, ell: float = 1.0) -> "FieldBC":
        return cls(DIRICHLET, DIRICHLET, ell)

    @classmethod
    def robin(cls, r0: float, rl: float, ell: float = 1.0) -> "FieldBC":
        if r0 < 0 or rl < 0:
            raise InvalidParams(f"Robin coefficients must be non-negative, got {r0}, {rl}")
        return cls(EndCondition(r0), EndCondition(rl), ell)

    @property
    def neumann(self) -> bool:
        return self.left.r == 0.0 and self.right.r == 0.0

    def frequency_equation(self, omega):
        """Im(e^{i w ell} alpha^{0+} alpha^{ell+}); real roots are the frequencies."""
        omega = np.asarray(omega, dtype=float)
        value = np.exp(1j * omega * self.ell) * self.left.alpha_plus(omega) * self.right.alpha_plus(omega)
        return value.imag


@dataclass(frozen=True)
class ExpMode:
    """One normal mode; ``omega == 0`` marks the Neumann zero mode."""

    k: int
    omega: float
    alpha0p: complex
    alphalp: complex
    c: float

    @property
    def alpha0m(self) -> complex:
        return np.conj(self.alpha0p)

    @property
    def alphalm(self) -> complex:
        return np.conj(self.alphalp)

    @property
    def zero(self) -> bool:
        return self.omega == 0.0

    @property
    def A(self) -> complex:
        """Coefficient of e^{i w x} in X_k (for the zero mode, the constant value)."""
        return self.alpha0p / self.c

    def X(self, x, order: int = 0):
        x = np.asarray(x, dtype=float)
        if self.zero:
            return (self.A.real if order == 0 else 0.0) + 0.0 * x
        w = self.omega
        phase = (1j * w) ** order * self.A * np.exp(1j * w * x)
        return 2.0 * phase.real

    def phi(self, t, x, eta: int = 1):
        """phi^eta_k(t, x)."""
        t = np.asarray(t, dtype=float)
        if self.zero:
            value = (1.0 - 1j * t) * self.X(x)
        else:
            value = np.exp(-1j * self.omega * t) * self.X(x)
        return value if eta > 0 else np.conj(value)


def normalization_c(omega: float, alpha0p: complex, ell: float) -> float:
    """c_k with <X_k, X_k> = 1/(2 omega_k)."""
    c2 = 4.0 * omega * ell * abs(alpha0p) ** 2 + 4.0 * math.sin(omega * ell) * (alpha0p**2 * np.exp(1j * omega * ell)).real
    return math.sqrt(c2)


def frequency_label(omega: float, ell: float) -> int:
    return int(math.floor(omega * ell / math.pi + 1e-9))


def exp_modes(bc: FieldBC, K: int, samples: int = 64) -> list:
    """The first ``K`` modes, ordered by frequency.

    Sign changes are scanned on a grid offset by half a step from the
    multiples of pi/ell, so Dirichlet and Neumann roots never sit on a node.
    In the Neumann case the zero mode X_0 = 1/sqrt(2 ell) comes first.
    """
    if K < 1:
        raise InvalidParams(f"need at least one mode, got {K}")
    ell = bc.ell
    modes = []
    if bc.neumann:
        modes.append(ExpMode(0, 0.0, complex(1.0 / math.sqrt(2.0 * ell)), complex(1.0 / math.sqrt(2.0 * ell)), 1.0))
    step = math.pi / ell / samples
    f = bc.frequency_equation
    cell = 0
    while len(modes) < K:
        grid = (cell * samples + np.arange(samples + 1) + 0.5) * step
        values = f(grid)
        for i in np.nonzero(np.sign(values[:-1]) * np.sign(values[1:]) < 0)[0]:
            try:
                omega = brentq(f, grid[i], grid[i + 1], xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=200)
            except ValueError as exc:
                raise BracketFailure(str(exc), (grid[i], grid[i + 1])) from None
            a0 = complex(bc.left.alpha_plus(omega))
            al = complex(bc.right.alpha_plus(omega))
            modes.append(ExpMode(frequency_label(omega, ell), omega, a0, al, normalization_c(omega, a0, ell)))
            if len(modes) == K:
                break
        cell += 1
        if cell > 10 * K + 10:
            raise BracketFailure("frequency scan found too few roots", (0.0, grid[-1]))
    return modes


def asymptotic_frequency(k, bc: FieldBC):
    """k pi/ell + (r0 + rl)/(k pi) for Robin ends."""
    k = np.asarray(k, dtype=float)
    return k * math.pi / bc.ell + ((bc.left.r or 0.0) + (bc.right.r or 0.0)) / (k * math.pi)


# embeddings ---------------------------------------------------------------------

Rule = Callable[[np.ndarray, int], np.ndarray]


@dataclass(frozen=True)
class Embedding:
    """sigma -> (t(sigma), x(sigma)) on [0, ell]; rules give the value (order 0) or derivative (order 1)."""

    t: Rule
    x: Rule
    ell: float = 1.0
    name: str = "embedding"

    def __call__(self, sigma, order: int = 0):
        sigma = np.asarray(sigma, dtype=float)
        return self.t(sigma, order) + 0.0 * sigma, self.x(sigma, order) + 0.0 * sigma

    def slope(self, sigma: float) -> float:
        dt, dx = self(sigma, 1)
        return float(dt / dx)

    def boundary_slopes(self) -> Tuple[float, float]:
        return self.slope(0.0), self.slope(self.ell)

    def validate(self, samples: int = 2049) -> "Embedding":
        sigma = np.linspace(0.0, self.ell, samples)
        _, x = self(sigma)
        dt, dx = self(sigma, 1)
        if abs(x[0]) > 1e-12 or abs(x[-1] - self.ell) > 1e-12 * max(1.0, self.ell):
            raise NotSpacelike(f"{self.name}: x must run from 0 to ell")
        if np.any(dx <= 0):
            raise NotSpacelike(f"{self.name}: x is not strictly increasing")
        if np.any(dx**2 - dt**2 <= 0):
            i = int(np.argmin(dx**2 - dt**2))
            raise NotSpacelike(f"{self.name}: not space-like at sigma={sigma[i]:.6g}")
        return self

    def reparametrize(self, s: Rule) -> "Embedding":
        """Compose with a monotone map s of [0, ell] onto itself."""
        base = self

        def t(sigma, order=0):
            inner = s(sigma, 0)
            return base.t(inner, 0) if order == 0 else base.t(inner, 1) * s(sigma, 1)

        def x(sigma, order=0):
            inner = s(sigma, 0)
            return base.x(inner, 0) if order == 0 else base.x(inner, 1) * s(sigma, 1)

        return Embedding(t, x, self.ell, f"{self.name}-reparametrized")


def _identity(sigma, order=0):
    return sigma if order == 0 else np.ones_like(sigma)


def _embedding_with_time(time: Rule, ell: float, name: str) -> Embedding:
    return Embedding(time, _identity, ell, name).validate()


def flat(t0: float = 0.0, ell: float = 1.0) -> Embedding:
    def t(sigma, order=0):
        return np.full_like(sigma, t0) if order == 0 else np.zeros_like(sigma)

    return _embedding_with_time(t, ell, f"flat:{t0}")


def tilted(s0: float, sl: float = 0.0, ell: float = 1.0, t0: float = 0.0) -> Embedding:
    """t = t0 + s0 sigma (1 - sigma/ell)^2 - sl (ell - sigma)(sigma/ell)^2: slopes s0 and sl at the ends."""

    def t(sigma, order=0):
        u = sigma / ell
        if order == 0:
            return t0 + s0 * sigma * (1 - u) ** 2 - sl * (ell - sigma) * u**2
        return s0 * (1 - u) * (1 - 3 * u) - sl * u * (2 - 3 * u)

    return _embedding_with_time(t, ell, f"tilted:{s0},{sl}")


def bump(A: float, ell: float = 1.0, t0: float = 0.0) -> Embedding:
    """t = t0 + A sin^2(pi sigma/ell): curved inside, flat slope at both ends."""

    def t(sigma, order=0):
        if order == 0:
            return t0 + A * np.sin(math.pi * sigma / ell) ** 2
        return A * math.pi / ell * np.sin(2 * math.pi * sigma / ell)

    return _embedding_with_time(t, ell, f"bump:{A}")


def sine_reparametrization(eps: float, ell: float = 1.0) -> Rule:
    """s(sigma) = sigma + eps ell sin(pi sigma/ell)/pi, monotone for |eps| < 1."""
    if abs(eps) >= 1:
        raise InvalidParams("reparametrization needs |eps| < 1")

    def s(sigma, order=0):
        if order == 0:
            return sigma + eps * ell * np.sin(math.pi * sigma / ell) / math.pi
        return 1 + eps * np.cos(math.pi * sigma / ell)

    return s


def embedding_preset(spec: str, ell: float = 1.0) -> Embedding:
    """Parse ``flat[:t0]``, ``tilted:s0[,sl]`` or ``bump:A``."""
    name, _, args = spec.partition(":")
    values = [float(a) for a in args.split(",") if a.strip()] if args else []
    try:
        if name == "flat":
            return flat(*values, ell=ell)
        if name == "tilted":
            return tilted(*values, ell=ell)
        if name == "bump":
            return bump(*values, ell=ell)
    except TypeError:
        raise InvalidParams(f"bad arguments for embedding preset {spec!r}") from None
    raise InvalidParams(f"unknown embedding preset {name!r}")


# mode data along an embedding ---------------------------------------------------


@dataclass(frozen=True)
class ModeArrays:
    omega: np.ndarray
    A: np.ndarray
    zero: np.ndarray

    @classmethod
    def of(cls, modes: Sequence[ExpMode]) -> "ModeArrays":
        return cls(
            np.array([m.omega for m in modes]),
            np.array([m.A for m in modes], dtype=complex),
            np.array([m.zero for m in modes]),
        )


def mode_data_on(arrays: ModeArrays, X: Embedding, sigma: np.ndarray):
    """Values Phi[k, sigma] and momenta Pi[k, sigma] of phi^+_k along X."""
    t, x = X(sigma)
    dt, dx = X(sigma, 1)
    w = arrays.omega[:, None]
    A = arrays.A[:, None]
    ea = A * np.exp(-1j * w * (t - x))
    eb = np.conj(A) * np.exp(-1j * w * (t + x))
    Phi = ea + eb
    Pi = -1j * w * (ea * (dx - dt) + eb * (dx + dt))
    if np.any(arrays.zero):
        z = arrays.zero
        X0 = arrays.A[z].real[:, None]
        Phi[z] = (1.0 - 1j * t) * X0
        Pi[z] = -1j * X0 * dx
    return Phi, Pi


def _panel_count(arrays: ModeArrays, ell: float, minimum: int = 32) -> int:
    top = 2.0 * float(np.max(arrays.omega, initial=0.0))
    return max(minimum, int(math.ceil(4.0 * top * ell / math.pi)))


def _integrate_pairs(integrand, ell: float, panels: int, order: int = 32, chunk: int = 64):
    """Sum of integrand(nodes, weights) over composite Gauss-Legendre panels, chunked along sigma."""
    edges = np.linspace(0.0, ell, panels + 1)
    total = None
    for start in range(0, panels, chunk):
        stop = min(panels, start + chunk)
        nodes, weights = composite_nodes(edges[start], edges[stop], stop - start, order)
        part = integrand(nodes, weights)
        total = part if total is None else total + part
    return total


def _with_error(compute, panels: int):
    fine = compute(panels)
    coarse = compute(max(1, panels // 2))
    return fine, float(np.max(np.abs(fine - coarse)))


# pairing ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ModeSolution:
    """phi = sum_k (plus_k phi^+_k + minus_k phi^-_k)."""

    modes: Tuple[ExpMode, ...]
    plus: np.ndarray
    minus: np.ndarray

    @classmethod
    def basis(cls, modes: Sequence[ExpMode], k: int, eta: int = 1) -> "ModeSolution":
        """phi^eta of the mode at 0-based position k."""
        plus = np.zeros(len(modes), dtype=complex)
        minus = np.zeros(len(modes), dtype=complex)
        (plus if eta > 0 else minus)[k] = 1.0
        return cls(tuple(modes), plus, minus)

    @classmethod
    def real(cls, modes: Sequence[ExpMode], a: np.ndarray) -> "ModeSolution":
        a = np.asarray(a, dtype=complex)
        return cls(tuple(modes), a, np.conj(a))

    def data_on(self, X: Embedding, sigma: np.ndarray):
        Phi, Pi = mode_data_on(ModeArrays.of(self.modes), X, sigma)
        value = self.plus @ Phi + self.minus @ np.conj(Phi)
        momentum = self.plus @ Pi + self.minus @ np.conj(Pi)
        return value, momentum


@dataclass(frozen=True)
class PairingResult:
    value: complex
    error: float


def kg_pairing(sol1: ModeSolution, sol2: ModeSolution, X: Embedding, tol: float = 1e-9) -> PairingResult:
    """<<sol1, sol2>> on X, antilinear in sol1, with a panel-halving error estimate."""
    arrays = ModeArrays.of(sol1.modes + sol2.modes)

    def compute(panels):
        def integrand(nodes, weights):
            q1, p1 = sol1.data_on(X, nodes)
            q2, p2 = sol2.data_on(X, nodes)
            return 1j * np.sum(weights * (np.conj(q1) * p2 - q2 * np.conj(p1)))

        return _integrate_pairs(integrand, X.ell, panels)

    value, error = _with_error(compute, _panel_count(arrays, X.ell))
    if error > tol * (1.0 + abs(value)):
        raise QuadratureFailure(f"pairing not resolved (error {error:.3g})")
    return PairingResult(complex(value), error)


def pairing_gram(modes: Sequence[ExpMode], X: Embedding):
    """Blocks (<<phi^+_k, phi^+_l>>, <<phi^+_k, phi^-_l>>) on X and an error estimate."""
    arrays = ModeArrays.of(modes)
    size = len(modes)

    def compute(panels):
        def integrand(nodes, weights):
            Phi, Pi = mode_data_on(arrays, X, nodes)
            PhiW, PiW = np.conj(Phi) * weights, np.conj(Pi) * weights
            pp = 1j * (PhiW @ Pi.T - PiW @ Phi.T)
            pm = 1j * (PhiW @ np.conj(Pi).T - PiW @ np.conj(Phi).T)
            return np.stack([pp, pm])

        return _integrate_pairs(integrand, X.ell, panels)

    blocks, error = _with_error(compute, _panel_count(arrays, X.ell))
    return blocks[0], blocks[1], error


# Bogoliubov coefficients --------------------------------------------------------------


@dataclass(frozen=True)
class BogoliubovMatrices:
    """gamma[n, m] and beta[n, m] with n labelling the input (X_I) and m the output (X_F)."""

    gamma: np.ndarray
    beta: np.ndarray
    error: float

    def transport(self, a: np.ndarray) -> np.ndarray:
        """a^F_m = sum_n gamma_nm a_n + beta_nm conj(a_n)."""
        a = np.asarray(a, dtype=complex)
        return self.gamma.T @ a + self.beta.T @ np.conj(a)

    def partial_sums(self, counts: Sequence[int]) -> np.ndarray:
        power = np.abs(self.beta) ** 2
        return np.array([power[:N, :N].sum() for N in counts])


def bogoliubov_matrices(X_I: Embedding, X_F: Embedding, modes: Sequence[ExpMode]) -> BogoliubovMatrices:
    """gamma and beta from pairing the transported modes with the basis on X_F."""
    arrays = ModeArrays.of(modes)
    size = len(modes)

    def compute(panels):
        def integrand(nodes, weights):
            PhiI, PiI = mode_data_on(arrays, X_I, nodes)
            PhiF, PiF = mode_data_on(arrays, X_F, nodes)
            PhiIW, PiIW = PhiI * weights, PiI * weights
            kernel = PiIW @ PhiF.T - PhiIW @ PiF.T
            gamma = 1j * (PiIW @ np.conj(PhiF).T - PhiIW @ np.conj(PiF).T)
            return np.stack([kernel, gamma])

        return _integrate_pairs(integrand, X_I.ell, panels)

    blocks, error = _with_error(compute, _panel_count(arrays, X_I.ell))
    return BogoliubovMatrices(blocks[1], 1j * np.conj(blocks[0]), error)


def _light_cone(X: Embedding, sigma):
    t, x = X(sigma)
    dt, dx = X(sigma, 1)
    return t - x, t + x, dt - dx, dt + dx


def beta_entry(X_I: Embedding, X_F: Embedding, n: int, m: int, modes: Sequence[ExpMode], panels: Optional[int] = None) -> complex:
    """beta_nm from the four exponential pieces.

    With a = t - x, b = t + x the two same-direction pieces are oscillatory
    integrals done by quadrature; the two mixed pieces are exact derivatives
    and are evaluated in closed form.
    """
    mn, mm = modes[n], modes[m]
    if mn.zero or mm.zero:
        raise InvalidParams("the zero mode has no exponential form; use bogoliubov_matrices")
    wn, wm = mn.omega, mm.omega
    An, Am = mn.A, mm.A
    Bn, Bm = np.conj(An), np.conj(Am)
    ell = X_I.ell
    panels = panels or max(32, int(math.ceil(4.0 * (wn + wm) * ell / math.pi)))
    nodes, weights = composite_nodes(0.0, ell, panels)
    aI, bI, daI, dbI = _light_cone(X_I, nodes)
    aF, bF, daF, dbF = _light_cone(X_F, nodes)
    same_a = 1j * An * Am * np.sum(weights * (wn * daI - wm * daF) * np.exp(-1j * (wn * aI + wm * aF)))
    same_b = -1j * Bn * Bm * np.sum(weights * (wn * dbI - wm * dbF) * np.exp(-1j * (wn * bI + wm * bF)))
    ends = np.array([0.0, ell])
    aI, bI, _, _ = _light_cone(X_I, ends)
    aF, bF, _, _ = _light_cone(X_F, ends)
    mixed_ab = -An * Bm * np.diff(np.exp(-1j * (wn * aI + wm * bF)))[0]
    mixed_ba = Bn * Am * np.diff(np.exp(-1j * (wn * bI + wm * aF)))[0]
    return complex(1j * np.conj(same_a + same_b + mixed_ab + mixed_ba))


def beta_leading(X_I: Embedding, X_F: Embedding, n: int, m: int, modes: Sequence[ExpMode]) -> complex:
    """Large-frequency form: mixed pieces exact, oscillatory pieces by their endpoint terms."""
    mn, mm = modes[n], modes[m]
    wn, wm = mn.omega, mm.omega
    An, Am = mn.A, mm.A
    Bn, Bm = np.conj(An), np.conj(Am)
    ends = np.array([0.0, X_I.ell])
    aI, bI, daI, dbI = _light_cone(X_I, ends)
    aF, bF, daF, dbF = _light_cone(X_F, ends)
    same_a = -An * Am * np.diff((wn * daI - wm * daF) / (wn * daI + wm * daF) * np.exp(-1j * (wn * aI + wm * aF)))[0]
    same_b = Bn * Bm * np.diff((wn * dbI - wm * dbF) / (wn * dbI + wm * dbF) * np.exp(-1j * (wn * bI + wm * bF)))[0]
    mixed_ab = -An * Bm * np.diff(np.exp(-1j * (wn * aI + wm * bF)))[0]
    mixed_ba = Bn * Am * np.diff(np.exp(-1j * (wn * bI + wm * aF)))[0]
    return complex(1j * np.conj(same_a + same_b + mixed_ab + mixed_ba))


@dataclass(frozen=True)
class BogoliubovKernel:
    N_I: np.ndarray
    N_F: np.ndarray
    A: np.ndarray
    B: np.ndarray
    f_tau: np.ndarray
    tau: float


def kernel_quantities(X_I: Embedding, X_F: Embedding, sigma, omega_l: float, omega_m: float) -> BogoliubovKernel:
    """N_I, N_F, A = x'_I x'_F - t'_I t'_F, B = t'_I x'_F - t'_F x'_I and f_tau at sigma."""
    dtI, dxI = X_I(sigma, 1)
    dtF, dxF = X_F(sigma, 1)
    tau = omega_m / (omega_l + omega_m)
    N_I = dxI**2 - dtI**2
    N_F = dxF**2 - dtF**2
    A = dxI * dxF - dtI * dtF
    B = dtI * dxF - dtF * dxI
    inv_f = (dxI * (1 - tau) + dxF * tau) ** 2 - (dtI * (1 - tau) + dtF * tau) ** 2
    if np.any(N_I <= 0) or np.any(N_F <= 0) or np.any(A <= 0) or np.any(inv_f <= 0):
        raise NotSpacelike("kernel quantities need both embeddings space-like")
    return BogoliubovKernel(N_I, N_F, A, B, 1.0 / inv_f, tau)


# classification ------------------------------------------------------------------------


@dataclass(frozen=True)
class Classification:
    decision: str                      # "Unitary" or "NonUnitary"
    slopes_I: Tuple[float, float]
    slopes_F: Tuple[float, float]
    counts: Tuple[int, ...]
    partial_sums: Tuple[float, ...]
    increments: Tuple[float, ...]      # S_{2N} - S_N for each N with 2N in counts
    floor: float
    evidence_agrees: bool
    quadrature_error: float

    def to_dict(self) -> dict:
        return {
            "decision": self.decision,
            "slopes": {"initial": list(self.slopes_I), "final": list(self.slopes_F)},
            "S_N": [{"N": n, "S": s} for n, s in zip(self.counts, self.partial_sums)],
            "increments": list(self.increments),
            "floor": self.floor,
            "evidence_agrees": self.evidence_agrees,
            "quadrature_error": self.quadrature_error,
        }


def slopes_match(X_I: Embedding, X_F: Embedding, tol: float = SLOPE_TOL) -> bool:
    return all(abs(a - b) <= tol for a, b in zip(X_I.boundary_slopes(), X_F.boundary_slopes()))


def dyadic_counts(N0: int, N: int) -> Tuple[int, ...]:
    counts = [N0]
    while counts[-1] < 2 * N:
        counts.append(2 * counts[-1])
    return tuple(counts)


def unitarity_classification(
    X_I: Embedding, X_F: Embedding, bc: FieldBC, N: int = 80, N0: int = 10, matrices: Optional[BogoliubovMatrices] = None
) -> Classification:
    """Boundary-slope decision plus dyadic partial sums of sum |beta|^2 up to 2N modes."""
    counts = dyadic_counts(N0, N)
    if matrices is None:
        matrices = bogoliubov_matrices(X_I, X_F, exp_modes(bc, counts[-1]))
    sums = matrices.partial_sums(counts)
    increments = np.diff(sums)
    floor = 1e-4 * abs(sums[0])
    unitary = slopes_match(X_I, X_F)
    if unitary:
        negligible = max(floor, NOISE_FLOOR)
        agrees = bool(np.all(increments <= negligible) or np.all(np.diff(increments) < 0))
    else:
        agrees = bool(np.min(increments) >= floor and floor > 0)
    return Classification(
        "Unitary" if unitary else "NonUnitary",
        X_I.boundary_slopes(), X_F.boundary_slopes(),
        counts, tuple(float(s) for s in sums), tuple(float(d) for d in increments),
        floor, agrees, matrices.error,
    )
