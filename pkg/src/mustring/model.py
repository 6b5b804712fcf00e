"""Physical parameters of the string, derived constants, and config loading."""

from __future__ import annotations

import math
from dataclasses import dataclass, fields, replace
from pathlib import Path

from scipy.optimize import brentq

from .errors import InvalidParams, ParseError, UnsolvableAlpha, ValidationError

LEFT, RIGHT = 0, 1
ENDPOINTS = (LEFT, RIGHT)


def sigma(j: int) -> int:
    """Sign map of the endpoints: 0 at x=0, 1 at x=ell."""
    if j not in ENDPOINTS:
        raise ValueError(f"endpoint must be 0 or 1, got {j!r}")
    return j


def outward_sign(j: int) -> int:
    """(-1)**(sigma(j)+1): -1 at the left end, +1 at the right end."""
    return -1 if sigma(j) == 0 else 1


@dataclass(frozen=True)
class StringParams:
    """Physical inputs: density, tension, length, endpoint masses, springs, couplings.

    Construction does not validate so that limiting cases (such as the
    massless-string two-body limit) can be expressed; call ``validate``.
    """

    rho: float = 1.0
    gamma: float = 1.0
    ell: float = 1.0
    m0: float = 0.0
    ml: float = 0.0
    k0: float = 0.0
    kl: float = 0.0
    eps0: int = 1
    epsl: int = 1

    def validate(self) -> "StringParams":
        for name in ("rho", "gamma", "ell"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise InvalidParams(f"{name} must be positive, got {value}")
        for name in ("m0", "ml", "k0", "kl"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value >= 0):
                raise InvalidParams(f"{name} must be non-negative, got {value}")
        for name in ("eps0", "epsl"):
            if getattr(self, name) not in (0, 1):
                raise InvalidParams(f"{name} must be 0 or 1, got {getattr(self, name)}")
        return self

    def mass(self, j: int) -> float:
        return (self.m0, self.ml)[sigma(j)]

    def spring(self, j: int) -> float:
        return (self.k0, self.kl)[sigma(j)]

    def coupling(self, j: int) -> int:
        return (self.eps0, self.epsl)[sigma(j)]

    def with_(self, **changes) -> "StringParams":
        return replace(self, **changes)


PRESETS = {
    # unit string with unit masses and springs at both ends
    "baseline": StringParams(1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0),
    # mu = r = 0.3: the baseline's symmetric shape, scaled into the lower cubic branch
    "diagonal": StringParams(1.0, 1.0, 1.0, 0.3, 0.3, 0.3, 0.3),
    # light masses with unit springs, also on the lower branch
    "light": StringParams(1.0, 1.0, 1.0, 0.1, 0.1, 1.0, 1.0),
    "neumann": StringParams(1.0, 1.0, 1.0, 0.0, 0.0, 0.0, 0.0),
    "robin": StringParams(1.0, 1.0, 1.0, 0.0, 0.0, 0.5, 0.5),
}


@dataclass(frozen=True)
class DerivedConstants:
    """Ratios mu_j = m_j/rho, r_j = k_j/gamma, measure weights alpha_j and Robin c_j."""

    mu0: float
    mul: float
    r0: float
    rl: float
    alpha0: float
    alphal: float
    c0: float
    cl: float
    ell: float = 1.0
    rho: float = 1.0
    gamma: float = 1.0
    branch: str = "lower"

    def mu(self, j: int) -> float:
        return (self.mu0, self.mul)[sigma(j)]

    def r(self, j: int) -> float:
        return (self.r0, self.rl)[sigma(j)]

    def alpha(self, j: int) -> float:
        return (self.alpha0, self.alphal)[sigma(j)]

    def c(self, j: int) -> float:
        return (self.c0, self.cl)[sigma(j)]

    def boundary_factor(self, j: int) -> float:
        """1 - alpha_j r_j: ratio of a Robin-domain boundary value to its trace.

        Recovered as alpha_j r_j / c_j, which avoids cancellation near alpha_j r_j = 1.
        """
        c = self.c(j)
        return self.alpha(j) * self.r(j) / c if c else 1.0

    def c_over_alpha(self, j: int) -> float:
        """c_j/alpha_j written as r_j/(1-alpha_j r_j), finite when alpha_j = 0."""
        return self.r(j) / self.boundary_factor(j)

    @property
    def wave_speed(self) -> float:
        return math.sqrt(self.gamma / self.rho)


def solve_alpha(mu: float, r: float, branch: str = "lower") -> float:
    """Root of alpha*(1 - alpha*r)**2 = mu.

    ``branch="lower"`` returns the unique root in [0, 1/(3r)], which exists
    iff mu <= 4/(27 r). ``branch="upper"`` returns the unique root above 1/r,
    which always exists; there 1 - alpha*r < 0.

    Both are solved in u = alpha*r, where u(1-u)^2 = mu*r; the upper branch
    uses b = u - 1 > 0 with b^2(1+b) = mu*r so that small springs do not
    cancel in 1 - alpha*r.
    """
    if mu < 0 or r < 0:
        raise InvalidParams(f"mu and r must be non-negative, got mu={mu}, r={r}")
    if mu == 0.0:
        return 0.0
    if r == 0.0:
        return mu
    return solve_scaled_alpha(mu, r, branch)[0]


def solve_scaled_alpha(mu: float, r: float, branch: str = "lower"):
    """(alpha, 1 - alpha*r) for mu, r > 0, the second factor computed without cancellation."""
    target = mu * r
    if branch == "lower":
        if target > 4.0 / 27.0 * (1.0 + 1e-15):
            raise UnsolvableAlpha(
                f"mu={mu} exceeds 4/(27 r)={4.0 / (27.0 * r)}; no root on the lower branch"
            )
        g = lambda u: u * (1.0 - u) ** 2 - target
        slope = lambda u: (1.0 - u) * (1.0 - 3.0 * u)
        lo, hi = 0.0, 1.0 / 3.0
        if g(hi) <= 0.0:
            u = hi
        else:
            u = _polish(g, slope, brentq(g, lo, hi, xtol=1e-300, rtol=1e-15, maxiter=500), lo, hi)
        alpha, factor = u / r, 1.0 - u
    elif branch == "upper":
        g = lambda b: b * b * (1.0 + b) - target
        slope = lambda b: b * (2.0 + 3.0 * b)
        # b^2 <= target and b^3 <= target bound the root
        hi = max(math.sqrt(target), target ** (1.0 / 3.0))
        b = hi if g(hi) <= 0.0 else _polish(g, slope, brentq(g, 0.0, hi, xtol=1e-300, rtol=1e-15, maxiter=500), 0.0, hi)
        alpha, factor = (1.0 + b) / r, -b
    else:
        raise InvalidParams(f"unknown branch {branch!r}")
    if not (math.isfinite(alpha) and factor != 0.0):
        raise InvalidParams(f"alpha is not representable for mu={mu}, r={r} on the {branch} branch")
    return alpha, factor


def _polish(g, slope, root, lo, hi):
    """One Newton step, kept only if it stays in [lo, hi] and lowers the residual."""
    s = slope(root)
    if s != 0.0:
        polished = root - g(root) / s
        if lo <= polished <= hi and abs(g(polished)) < abs(g(root)):
            return polished
    return root


def derive_constants(params: StringParams, branch: str = "lower") -> DerivedConstants:
    params.validate()
    mu = [params.m0 / params.rho, params.ml / params.rho]
    r = [params.k0 / params.gamma, params.kl / params.gamma]
    alpha, c = [], []
    for j in ENDPOINTS:
        if mu[j] > 0.0 and r[j] > 0.0:
            a, factor = solve_scaled_alpha(mu[j], r[j], branch)
        else:
            a, factor = solve_alpha(mu[j], r[j], branch), 1.0
        alpha.append(a)
        c.append(a * r[j] / factor)
    return DerivedConstants(
        mu0=mu[0], mul=mu[1], r0=r[0], rl=r[1],
        alpha0=alpha[0], alphal=alpha[1], c0=c[0], cl=c[1],
        ell=params.ell, rho=params.rho, gamma=params.gamma, branch=branch,
    )


CONFIG_KEYS = tuple(f.name for f in fields(StringParams))
_INTEGER_KEYS = {"eps0", "epsl"}


def parse_config(text: str) -> StringParams:
    """Parse ``key = value`` lines; ``#`` starts a comment. Unknown keys are rejected."""
    values: dict[str, float] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" in line:
            key, _, value = line.partition("=")
        elif ":" in line:
            key, _, value = line.partition(":")
        else:
            raise ParseError("expected 'key = value'", line=lineno)
        key, value = key.strip(), value.strip()
        if key not in CONFIG_KEYS:
            raise ParseError("unknown key", key=key, line=lineno)
        if key in values:
            raise ParseError("duplicate key", key=key, line=lineno)
        try:
            number = float(value)
        except ValueError:
            raise ParseError(f"not a decimal number: {value!r}", key=key, line=lineno) from None
        if key in _INTEGER_KEYS:
            if number not in (0.0, 1.0):
                raise ValidationError(f"{key} must be 0 or 1, got {value} (line {lineno})")
            number = int(number)
        values[key] = number
    return StringParams(**values).validate()


def load_config(path) -> StringParams:
    return parse_config(Path(path).read_text())


def format_config(params: StringParams) -> str:
    return "".join(f"{name} = {getattr(params, name)!r}\n" for name in CONFIG_KEYS)
