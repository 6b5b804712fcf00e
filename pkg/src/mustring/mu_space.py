"""The Hilbert space L2_mu[0, ell] = R x L2(0, ell) x R and its calculus.

An element is a pair of boundary values plus an interior rule. Boundary
values are independent of the interior one-sided limits (the traces).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Optional

import numpy as np

from .errors import NotDifferentiable, NotInDomain, QuadratureFailure
from .model import ENDPOINTS, DerivedConstants, sigma

Rule = Callable[[np.ndarray, int], np.ndarray]

SMOOTHNESS = {0: "L2", 1: "H1", 2: "H2"}


def _numeric_derivative(f: Callable, ell: float, order: int) -> Callable:
    """Central differences at h = 1e-6*ell (first order) or 1e-4*ell (second order).

    Stencils shift inward near the endpoints so ``f`` is only sampled on [0, ell].
    """
    if order == 1:
        h = 1e-6 * ell

        def d1(x):
            x = np.asarray(x, dtype=float)
            xc = np.clip(x, h, ell - h)
            return (f(xc + h) - f(xc - h)) / (2 * h) + 0 * x

        return d1
    h = 1e-4 * ell

    def d2(x):
        x = np.asarray(x, dtype=float)
        xc = np.clip(x, h, ell - h)
        return (f(xc + h) - 2 * f(xc) + f(xc - h)) / h**2 + 0 * x

    return d2


@dataclass(frozen=True)
class MuFunction:
    """Element of L2_mu: boundary values ``v0``, ``vl`` and an interior rule.

    ``rule(x, order)`` returns the order-th x-derivative of the interior
    function; orders up to ``max_order`` are available (``None`` = any).
    """

    v0: complex
    vl: complex
    rule: Rule
    ell: float = 1.0
    max_order: Optional[int] = 0

    @classmethod
    def from_callables(cls, interior, v0=0.0, vl=0.0, ell=1.0, derivatives=(), numeric=False):
        """Build from plain callables ``interior(x)``, ``derivatives[k](x)``.

        With ``numeric=True`` missing first and second derivatives fall back
        to finite differences.
        """
        funcs = [interior, *derivatives]
        if numeric:
            while len(funcs) < 3:
                funcs.append(_numeric_derivative(interior, ell, len(funcs)))

        def rule(x, order=0):
            if order >= len(funcs):
                raise NotDifferentiable(f"no rule for derivative of order {order}")
            return np.asarray(funcs[order](np.asarray(x, dtype=float)))

        return cls(v0, vl, rule, ell, len(funcs) - 1)

    @classmethod
    def boundary_only(cls, v0, vl, ell=1.0):
        """A function supported on the endpoints, e.g. F = (1, 0, 0)."""

        def rule(x, order=0):
            return np.zeros_like(np.asarray(x, dtype=float))

        return cls(v0, vl, rule, ell, None)

    @property
    def smoothness(self) -> str:
        if self.max_order is None or self.max_order >= 2:
            return "H2"
        return SMOOTHNESS[self.max_order]

    def has_order(self, order: int) -> bool:
        return self.max_order is None or order <= self.max_order

    def __call__(self, x, order: int = 0):
        if not self.has_order(order):
            raise NotDifferentiable(f"no rule for derivative of order {order}")
        return self.rule(np.asarray(x, dtype=float), order)

    def boundary(self, j: int):
        return (self.v0, self.vl)[sigma(j)]

    def trace(self, j: int, order: int = 0):
        """One-sided interior limit F(0+) or F(ell-) of the order-th derivative."""
        return self(0.0 if sigma(j) == 0 else self.ell, order)[()]

    # arithmetic -----------------------------------------------------------
    def __add__(self, other: "MuFunction") -> "MuFunction":
        a, b = self, other

        def rule(x, order=0):
            return a(x, order) + b(x, order)

        return MuFunction(a.v0 + b.v0, a.vl + b.vl, rule, a.ell, _min_order(a, b))

    def __neg__(self) -> "MuFunction":
        return self.scale(-1.0)

    def __sub__(self, other: "MuFunction") -> "MuFunction":
        return self + (-other)

    def scale(self, factor) -> "MuFunction":
        a = self

        def rule(x, order=0):
            return factor * a(x, order)

        return MuFunction(factor * a.v0, factor * a.vl, rule, a.ell, a.max_order)

    def __mul__(self, other):
        if not isinstance(other, MuFunction):
            return self.scale(other)
        a, b = self, other

        def rule(x, order=0):
            # Leibniz rule for the interior product
            return sum(
                math.comb(order, k) * a(x, k) * b(x, order - k) for k in range(order + 1)
            )

        return MuFunction(a.v0 * b.v0, a.vl * b.vl, rule, a.ell, _min_order(a, b))

    __rmul__ = __mul__

    def with_boundary(self, v0, vl) -> "MuFunction":
        return MuFunction(v0, vl, self.rule, self.ell, self.max_order)


def _min_order(a: MuFunction, b: MuFunction):
    if a.max_order is None:
        return b.max_order
    if b.max_order is None:
        return a.max_order
    return min(a.max_order, b.max_order)


# quadrature ----------------------------------------------------------------


@lru_cache(maxsize=8)
def gauss_legendre(n: int):
    return np.polynomial.legendre.leggauss(n)


def composite_nodes(a: float, b: float, panels: int, order: int = 32):
    """Nodes and weights of composite Gauss-Legendre on [a, b]."""
    x, w = gauss_legendre(order)
    edges = np.linspace(a, b, panels + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[:-1] + edges[1:])
    nodes = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    weights = (half[:, None] * w[None, :]).ravel()
    return nodes, weights


@dataclass(frozen=True)
class Quadrature:
    """Composite 32-point Gauss-Legendre with panel doubling.

    Doubling stops once successive results differ by less than
    ``tol * (1 + |result|)``; failing that at ``max_panels`` raises
    ``QuadratureFailure``.
    """

    panels: int = 4
    tol: float = 1e-10
    order: int = 32
    max_panels: int = 4096

    def integrate_with_error(self, f: Callable, a: float, b: float):
        """Integrate ``f`` over [a, b]; ``f`` may return shape (..., nodes) for vector integrands."""
        panels = self.panels
        nodes, weights = composite_nodes(a, b, panels, self.order)
        previous = np.asarray(f(nodes)) @ weights
        while True:
            panels *= 2
            nodes, weights = composite_nodes(a, b, panels, self.order)
            current = np.asarray(f(nodes)) @ weights
            error = float(np.max(np.abs(current - previous)))
            if error < self.tol * (1.0 + float(np.max(np.abs(current)))):
                return current, error
            if panels >= self.max_panels:
                raise QuadratureFailure(
                    f"no convergence on [{a}, {b}] with {panels} panels (last change {error:.3g})"
                )
            previous = current

    def integrate(self, f: Callable, a: float, b: float):
        return self.integrate_with_error(f, a, b)[0]


DEFAULT_QUADRATURE = Quadrature()


# inner products -------------------------------------------------------------


def interior_inner(f: MuFunction, g: MuFunction, q: Quadrature = DEFAULT_QUADRATURE):
    return q.integrate(lambda x: f(x) * g(x), 0.0, f.ell)


def inner_mu(f: MuFunction, g: MuFunction, d: DerivedConstants, q: Quadrature = DEFAULT_QUADRATURE):
    """alpha0 f(0)g(0) + int f g + alphal f(ell)g(ell); bilinear (no conjugation)."""
    total = interior_inner(f, g, q)
    for j in ENDPOINTS:
        if d.alpha(j) != 0.0:
            total += d.alpha(j) * f.boundary(j) * g.boundary(j)
    return total


def modified_inner(f: MuFunction, g: MuFunction, d: DerivedConstants, q: Quadrature = DEFAULT_QUADRATURE):
    """mu0 f(0+)g(0+) + int f g + mul f(ell-)g(ell-), built from traces."""
    total = interior_inner(f, g, q)
    for j in ENDPOINTS:
        if d.mu(j) != 0.0:
            total += d.mu(j) * f.trace(j) * g.trace(j)
    return total


def norm_mu(f: MuFunction, d: DerivedConstants, q: Quadrature = DEFAULT_QUADRATURE) -> float:
    return math.sqrt(abs(inner_mu(f, f, d, q)))


# Radon-Nikodym calculus -----------------------------------------------------


def _shifted(F: MuFunction, by: int) -> Rule:
    def rule(x, order=0):
        return F(x, order + by)

    return rule


def boundary_rn_derivative(F: MuFunction, d: DerivedConstants, j: int):
    """(F(0+)-F(0))/alpha0 at the left end, (F(ell)-F(ell-))/alphal at the right.

    At an endpoint with alpha_j = 0 the R factor is absent and 0 is returned.
    """
    alpha = d.alpha(j)
    if alpha == 0.0:
        return 0.0
    if sigma(j) == 0:
        return (F.trace(j) - F.boundary(j)) / alpha
    return (F.boundary(j) - F.trace(j)) / alpha


def rn_derivative(F: MuFunction, d: DerivedConstants) -> MuFunction:
    if not F.has_order(1):
        raise NotDifferentiable("interior rule has no first derivative")
    order = None if F.max_order is None else F.max_order - 1
    return MuFunction(
        boundary_rn_derivative(F, d, 0),
        boundary_rn_derivative(F, d, 1),
        _shifted(F, 1),
        F.ell,
        order,
    )


def product_correction(d: DerivedConstants, j: int) -> float:
    """K(j) = (-1)**sigma(j) * alpha_j."""
    return (1 - 2 * sigma(j)) * d.alpha(j)


def mu_product_derivative(F: MuFunction, G: MuFunction, d: DerivedConstants) -> MuFunction:
    """d(FG)/dmu = F'G + FG' + K F'G', with K = +alpha0, -alphal at the ends, 0 inside."""
    dF, dG = rn_derivative(F, d), rn_derivative(G, d)
    leibniz = dF * G + F * dG
    ends = [
        leibniz.boundary(j) + product_correction(d, j) * dF.boundary(j) * dG.boundary(j)
        for j in ENDPOINTS
    ]
    return leibniz.with_boundary(*ends)


def laplacian_mu(u: MuFunction, d: DerivedConstants) -> MuFunction:
    """Delta_mu u = (1 + C) d^2u/dmu^2, C = c_j at the endpoints and 0 inside."""
    if not u.has_order(2):
        raise NotInDomain("Laplacian needs an interior second derivative")
    second = rn_derivative(rn_derivative(u, d), d)
    return second.with_boundary(
        (1.0 + d.c0) * second.v0 if d.alpha0 else 0.0,
        (1.0 + d.cl) * second.vl if d.alphal else 0.0,
    )


def robin_domain_residual(u: MuFunction, d: DerivedConstants):
    """du/dmu(j) - (-1)**sigma(j) (c_j/alpha_j) u(j) at both ends.

    Where alpha_j = 0 the measure has no atom; the residual reported there is
    the classical Robin condition u'(j) - (-1)**sigma(j) r_j u(j+-).
    """
    out = []
    for j in ENDPOINTS:
        sign = 1 - 2 * sigma(j)
        if d.alpha(j) == 0.0:
            out.append(u.trace(j, 1) - sign * d.r(j) * u.trace(j))
        else:
            out.append(boundary_rn_derivative(u, d, j) - sign * d.c_over_alpha(j) * u.boundary(j))
    return tuple(out)


def robin_lift(interior: MuFunction, d: DerivedConstants) -> MuFunction:
    """Attach boundary values (1 - alpha_j r_j) * trace_j so the result lies in the Robin domain."""
    return interior.with_boundary(
        d.boundary_factor(0) * interior.trace(0),
        d.boundary_factor(1) * interior.trace(1),
    )
