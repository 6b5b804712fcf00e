import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from mustring.errors import NotDifferentiable, NotInDomain, QuadratureFailure
from mustring.model import PRESETS, StringParams, derive_constants
from mustring.mu_space import (
    MuFunction,
    Quadrature,
    inner_mu,
    interior_inner,
    laplacian_mu,
    modified_inner,
    mu_product_derivative,
    norm_mu,
    product_correction,
    rn_derivative,
    robin_domain_residual,
    robin_lift,
)
from mustring.spectrum import mode_functions

UNIT_ATOMS = derive_constants(StringParams(m0=1.0, ml=1.0))
NO_ATOMS = derive_constants(StringParams())

# smooth family: 1, x, x^2, cos(pi x), sin(2x) with first and second derivatives
_BASIS = (
    (lambda x: 1 + 0 * x, lambda x: 0 * x, lambda x: 0 * x),
    (lambda x: x, lambda x: 1 + 0 * x, lambda x: 0 * x),
    (lambda x: x**2, lambda x: 2 * x, lambda x: 2 + 0 * x),
    (lambda x: np.cos(np.pi * x), lambda x: -np.pi * np.sin(np.pi * x), lambda x: -np.pi**2 * np.cos(np.pi * x)),
    (lambda x: np.sin(2 * x), lambda x: 2 * np.cos(2 * x), lambda x: -4 * np.sin(2 * x)),
)


def smooth(coeffs, v0=None, vl=None):
    funcs = [
        (lambda x, k=k: sum(c * b[k](x) for c, b in zip(coeffs, _BASIS)))
        for k in range(3)
    ]
    f = MuFunction.from_callables(funcs[0], derivatives=funcs[1:])
    return f.with_boundary(
        f.trace(0) if v0 is None else v0,
        f.trace(1) if vl is None else vl,
    )


coefficients = st.lists(st.floats(-2.0, 2.0), min_size=5, max_size=5)


def test_constant_functions_with_unit_atoms():
    one = MuFunction.from_callables(lambda x: 1 + 0 * x, 1.0, 1.0)
    assert math.isclose(inner_mu(one, one, UNIT_ATOMS), 3.0, rel_tol=1e-12)


def test_sines_orthogonal_without_atoms():
    f = MuFunction.from_callables(lambda x: np.sin(np.pi * x))
    g = MuFunction.from_callables(lambda x: np.sin(2 * np.pi * x))
    assert abs(inner_mu(f, g, NO_ATOMS)) < 1e-12


@given(coefficients, coefficients, st.floats(-3, 3), st.floats(-3, 3), st.floats(-3, 3), st.floats(-3, 3))
def test_inner_mu_is_atoms_plus_interior(cf, cg, a, b, c, e):
    d = derive_constants(PRESETS["diagonal"])
    f, g = smooth(cf, a, c), smooth(cg, b, e)
    expected = d.alpha0 * a * b + interior_inner(f, g) + d.alphal * c * e
    assert math.isclose(inner_mu(f, g, d), expected, rel_tol=1e-12, abs_tol=1e-12)


def test_modified_inner_without_masses_is_inner_mu():
    f, g = smooth([1, 0.5, 0, 0.2, 0]), smooth([0, 1, 1, 0, 0.3])
    assert math.isclose(modified_inner(f, g, NO_ATOMS), inner_mu(f, g, NO_ATOMS), rel_tol=1e-14)


def test_modified_inner_matches_inner_mu_on_robin_domain():
    # alpha_j = mu_j when r_j = 0, and Robin-domain boundary values equal traces
    d = derive_constants(StringParams(m0=0.7, ml=0.4))
    f, g = robin_lift(smooth([1, 2, 0, 1, 0]), d), robin_lift(smooth([0, 1, -1, 0, 2]), d)
    assert math.isclose(modified_inner(f, g, d), inner_mu(f, g, d), rel_tol=1e-12)


def test_classical_modes_orthogonal_in_modified_inner(diagonal, diagonal_modes):
    X = [mode_functions(m, diagonal)[0] for m in diagonal_modes.modes[:6]]
    for i in range(6):
        for j in range(6):
            value = modified_inner(X[i], X[j], diagonal)
            if i == j:
                assert math.isclose(value, diagonal_modes[i].gm ** 2, rel_tol=1e-10)
            else:
                assert abs(value) < 1e-9 * diagonal_modes[i].gm * diagonal_modes[j].gm


def test_norm_mu():
    one = MuFunction.from_callables(lambda x: 1 + 0 * x, 1.0, 1.0)
    assert math.isclose(norm_mu(one, UNIT_ATOMS), math.sqrt(3.0))


def test_rn_derivative_continuous_boundary_vanishes():
    f = smooth([1, 1, 1, 0, 0])
    df = rn_derivative(f, UNIT_ATOMS)
    assert df.v0 == 0.0 and df.vl == 0.0


def test_rn_derivative_of_left_atom():
    d = derive_constants(PRESETS["diagonal"])
    F = MuFunction.boundary_only(1.0, 0.0)
    dF = rn_derivative(F, d)
    assert math.isclose(dF.v0, -1.0 / d.alpha0)
    assert dF.vl == 0.0
    assert np.all(dF(np.linspace(0, 1, 7)) == 0.0)


def test_rn_derivative_interior_is_ordinary():
    f = MuFunction.from_callables(lambda x: x**2, derivatives=(lambda x: 2 * x,))
    x = np.linspace(0, 1, 11)
    assert np.allclose(rn_derivative(f, UNIT_ATOMS)(x), 2 * x)


def test_rn_derivative_needs_first_derivative():
    f = MuFunction.from_callables(lambda x: x)
    with pytest.raises(NotDifferentiable):
        rn_derivative(f, UNIT_ATOMS)


def test_numeric_fallback_derivatives():
    f = MuFunction.from_callables(np.sin, numeric=True)
    x = np.linspace(0.1, 0.9, 9)
    assert np.allclose(f(x, 1), np.cos(x), atol=1e-8)
    assert np.allclose(f(x, 2), -np.sin(x), atol=1e-6)
    # endpoint stencils shift inward by one step
    ends = np.array([0.0, 1.0])
    assert np.allclose(f(ends, 1), np.cos(ends), atol=2e-6)
    assert np.allclose(f(ends, 2), -np.sin(ends), atol=2e-4)


def test_product_correction_sign():
    d = derive_constants(PRESETS["diagonal"])
    assert product_correction(d, 0) == d.alpha0
    assert product_correction(d, 1) == -d.alphal


def test_product_rule_on_left_atom():
    d = derive_constants(PRESETS["diagonal"])
    F = MuFunction.boundary_only(1.0, 0.0)
    lhs = mu_product_derivative(F, F, d)
    rhs = rn_derivative(F * F, d)
    assert math.isclose(lhs.v0, -1.0 / d.alpha0, rel_tol=1e-14)
    assert math.isclose(lhs.v0, rhs.v0, rel_tol=1e-14)


@given(coefficients, coefficients, st.floats(-3, 3), st.floats(-3, 3), st.floats(-3, 3), st.floats(-3, 3))
def test_product_rule_matches_derivative_of_product(cf, cg, a, b, c, e):
    d = derive_constants(PRESETS["diagonal"])
    F, G = smooth(cf, a, c), smooth(cg, b, e)
    lhs = mu_product_derivative(F, G, d)
    rhs = rn_derivative(F * G, d)
    scale = 1.0 + max(abs(v) for v in (a, b, c, e)) ** 2 / d.alpha0
    for j in (0, 1):
        assert abs(lhs.boundary(j) - rhs.boundary(j)) < 1e-10 * scale * 10
    x = np.linspace(0, 1, 13)
    assert np.allclose(lhs(x), rhs(x), atol=1e-10 * scale)


def test_laplacian_of_straight_line_with_continuous_ends():
    f = smooth([1, 2, 0, 0, 0])
    lap = laplacian_mu(f, NO_ATOMS)
    assert np.all(lap(np.linspace(0, 1, 5)) == 0.0)


def test_laplacian_needs_second_derivative():
    f = MuFunction.from_callables(lambda x: x, derivatives=(lambda x: 1 + 0 * x,))
    with pytest.raises(NotInDomain):
        laplacian_mu(f, UNIT_ATOMS)


@given(coefficients, coefficients)
def test_laplacian_symmetric_on_robin_domain(cu, cv):
    d = derive_constants(PRESETS["diagonal"])
    u, v = robin_lift(smooth(cu), d), robin_lift(smooth(cv), d)
    lhs = inner_mu(laplacian_mu(u, d), v, d)
    rhs = inner_mu(u, laplacian_mu(v, d), d)
    assert abs(lhs - rhs) < 1e-8


def test_normalized_modes_are_laplacian_eigenfunctions(diagonal, diagonal_modes):
    x = np.linspace(0, 1, 41)
    for mode in diagonal_modes.modes[:10]:
        _, hat = mode_functions(mode, diagonal)
        lap = laplacian_mu(hat, diagonal)
        w2 = mode.omega**2
        assert np.max(np.abs(lap(x) + w2 * hat(x))) < 1e-8 * w2
        for j in (0, 1):
            assert abs(lap.boundary(j) + w2 * hat.boundary(j)) < 1e-8 * w2


def test_modes_satisfy_robin_condition(diagonal, diagonal_modes):
    for mode in diagonal_modes.modes[:10]:
        _, hat = mode_functions(mode, diagonal)
        assert max(abs(r) for r in robin_domain_residual(hat, diagonal)) < 1e-10


def test_robin_residual_zero_for_continuous_without_springs():
    d = derive_constants(StringParams(m0=1.0, ml=1.0))
    assert robin_domain_residual(smooth([1, 1, 0, 0, 0]), d) == (0.0, 0.0)


def test_robin_residual_of_left_atom():
    d = derive_constants(StringParams(m0=1.0, ml=1.0))
    left, right = robin_domain_residual(MuFunction.boundary_only(1.0, 0.0), d)
    assert math.isclose(left, -1.0 / d.alpha0)
    assert right == 0.0


def test_quadrature_failure_on_rough_integrand():
    q = Quadrature(panels=2, tol=1e-14, max_panels=8)
    with pytest.raises(QuadratureFailure):
        q.integrate(lambda x: np.sign(x - 0.3337), 0.0, 1.0)


def test_quadrature_vector_integrand():
    q = Quadrature()
    values = q.integrate(lambda x: np.stack([x, x**2]), 0.0, 1.0)
    assert np.allclose(values, [0.5, 1.0 / 3.0])
