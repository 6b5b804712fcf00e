import math
import warnings

import numpy as np
import pytest
from scipy.integrate import solve_ivp

from mustring.dynamics import (
    EndpointData,
    boundary_ode_residual,
    constraint_chain,
    energy,
    evolve,
    expand,
    gaussian_data,
    interior_wave_residual,
    mode_data,
    physical_energy,
    two_mass_frequency,
    two_mass_limit,
)
from mustring.errors import InsufficientSmoothness, InvalidLimit, TruncationWarning
from mustring.model import PRESETS, StringParams, derive_constants
from mustring.mu_space import MuFunction
from mustring.spectrum import find_modes

DIAGONAL = PRESETS["diagonal"]


@pytest.fixture(scope="module")
def table(diagonal):
    return find_modes(diagonal, 60)


@pytest.fixture(scope="module")
def bump(diagonal):
    return gaussian_data(diagonal, width=0.1)


def test_evolve_at_zero_is_projection(table):
    data = mode_data(table, {1: 0.7, 3: -0.2}, {2: 0.4})
    out = evolve(data, 0.0, table)
    x = np.linspace(0, 1, 21)
    assert np.allclose(out.Q(x), data.Q(x), atol=1e-12)
    assert np.allclose(out.P(x), data.P(x), atol=1e-12)
    for j in (0, 1):
        assert math.isclose(out.Q.boundary(j), data.Q.boundary(j), abs_tol=1e-12)


def test_single_mode_oscillates(table):
    data = mode_data(table, {1: 1.0})
    Omega = table.time_frequencies[0]
    x = np.linspace(0, 1, 11)
    for t in (0.3, 1.7, 5.0):
        out = evolve(data, t, table)
        assert np.allclose(out.Q(x), math.cos(Omega * t) * table.evaluate(x, count=1)[0], atol=1e-12)


def test_energy_of_zero_data(diagonal):
    zero = MuFunction.boundary_only(0.0, 0.0)
    from mustring.dynamics import CauchyData

    assert energy(CauchyData(zero, zero), diagonal) == 0.0


def test_single_mode_energy_constant(table, diagonal):
    a = 0.8
    data = mode_data(table, {2: a})
    expected = 0.5 * diagonal.gamma * a**2 * table.omegas[1] ** 2
    for t in np.linspace(0, 10, 11):
        assert abs(energy(evolve(data, t, table), diagonal) - expected) < 1e-8 * expected


def test_two_mode_energy_adds(table, diagonal):
    e1 = energy(mode_data(table, {1: 0.5}), diagonal)
    e3 = energy(mode_data(table, {3: 0.25}, {3: 0.1}), diagonal)
    both = energy(mode_data(table, {1: 0.5, 3: 0.25}, {3: 0.1}), diagonal)
    assert math.isclose(both, e1 + e3, rel_tol=1e-9)


def test_mu_energy_equals_physical_energy(table, diagonal):
    data = mode_data(table, {1: 0.5, 2: -0.3}, {4: 0.2})
    assert math.isclose(energy(data, diagonal), physical_energy(data, DIAGONAL), rel_tol=1e-9)


def test_gaussian_energy_conserved(table, diagonal, bump):
    expansion = expand(bump, table)
    data = expansion.cauchy_data(0.0)
    e0 = energy(data, diagonal)
    for t in (2.5, 10.0):
        et = energy(expansion.cauchy_data(t), diagonal)
        assert abs(et - e0) < 1e-8 * (1 + e0)


def test_truncation_warning_for_rough_data(diagonal):
    small = find_modes(diagonal, 4)
    with pytest.warns(TruncationWarning):
        evolve(gaussian_data(diagonal, width=0.05), 1.0, small)


def test_no_warning_for_mode_data(table):
    data = mode_data(table, {1: 1.0})
    stripped = type(data)(data.Q, data.P)
    with warnings.catch_warnings():
        warnings.simplefilter("error", TruncationWarning)
        evolve(stripped, 1.0, table)


def test_time_reversal(table):
    data = mode_data(table, {1: 0.4, 2: 0.1, 5: -0.2}, {3: 0.3})
    back = evolve(evolve(data, 3.3, table), -3.3, table)
    x = np.linspace(0, 1, 17)
    assert np.allclose(back.Q(x), data.Q(x), atol=1e-10)
    assert np.allclose(back.P(x), data.P(x), atol=1e-10)


def test_interior_wave_residual(table, bump):
    expansion = expand(bump, table)
    x = np.linspace(0, 1, 33)
    worst = max(np.max(np.abs(interior_wave_residual(expansion, t, x))) for t in np.linspace(0, 5, 6))
    assert worst < 1e-6


def test_boundary_ode_for_single_mode(table):
    data = mode_data(table, {2: 1.3})
    w2 = table.time_frequencies[1] ** 2
    for t in (0.0, 0.9):
        for j in (0, 1):
            assert abs(boundary_ode_residual(data.expansion, j, t, DIAGONAL)) < 1e-8 * w2 * 1.3


def test_boundary_ode_static_zero(table):
    data = mode_data(table, {})
    assert boundary_ode_residual(data.expansion, 0, 0.0, DIAGONAL) == 0.0


def test_boundary_ode_reduces_to_robin_without_masses():
    params = PRESETS["robin"]
    d = derive_constants(params)
    tab = find_modes(d, 10)
    field = mode_data(tab, {1: 1.0, 2: 0.5}).expansion
    t = 0.4
    robin = params.gamma * -field.trace(t, 0, x_order=1) + params.k0 * field.trace(t, 0)
    assert math.isclose(boundary_ode_residual(field, 0, t, params), robin, abs_tol=1e-15)
    assert abs(robin) < 1e-10


def test_constraint_chain_single_mode(table, diagonal):
    data = mode_data(table, {1: 1.0})
    chain = constraint_chain(data, 3, DIAGONAL, diagonal)
    assert chain.max_relative < 1e-8
    assert max(abs(v) for v in chain.c1 + chain.c2 + chain.c3) < 1e-10


def test_constraint_chain_detects_position_offset(table, diagonal):
    data = mode_data(table, {1: 1.0})
    q = [data.Q.trace(0) - 0.01, data.Q.trace(1)]
    chain = constraint_chain(data, 1, DIAGONAL, diagonal, EndpointData(q=q))
    assert math.isclose(chain.c2[0], 0.01, rel_tol=1e-9)
    assert chain.c2[1] == 0.0


def test_constraint_chain_decoupled_end_is_dirichlet(diagonal):
    params = DIAGONAL.with_(eps0=0)
    f = MuFunction.from_callables(
        lambda x: np.sin(x) + 0.2, derivatives=[(lambda x, k=k: np.sin(x + k * math.pi / 2)) for k in range(1, 9)]
    )
    chain = constraint_chain(type(mode_data(find_modes(diagonal, 2), {}))(f, f), 1, params, diagonal)
    assert math.isclose(chain.c2[0], 0.2, rel_tol=1e-14)


def test_constraint_chain_propagates(table, diagonal):
    expansion = mode_data(table, {1: 0.5, 2: 0.2}, {3: 0.1}).expansion
    for t in (0.0, 1.1, 4.0):
        assert constraint_chain(expansion.cauchy_data(t), 2, DIAGONAL, diagonal).max_relative < 1e-8


def test_constraint_chain_needs_smoothness(diagonal):
    f = MuFunction.from_callables(np.sin, derivatives=(np.cos,))
    data = type(mode_data(find_modes(diagonal, 2), {}))(f, f)
    with pytest.raises(InsufficientSmoothness):
        constraint_chain(data, 1, DIAGONAL, diagonal)


def test_two_mass_equal_masses_frequency():
    params = StringParams(rho=0.0, m0=1.0, ml=1.0)
    assert math.isclose(two_mass_frequency(params), math.sqrt(2.0))


def test_two_mass_symmetric_stretch_keeps_center():
    params = StringParams(rho=0.0, m0=1.0, ml=1.0)
    t = np.linspace(0, 10, 101)
    traj = two_mass_limit(params, (-0.1, 0.1, 0.0, 0.0), t)
    assert np.allclose(0.5 * (traj.left + traj.right), 0.0, atol=1e-15)


def test_two_mass_matches_integrated_ode():
    params = StringParams(rho=0.0, gamma=1.3, ell=0.8, m0=0.7, ml=1.9)
    ic = (0.2, -0.1, 0.3, 0.05)
    t = np.linspace(0, 10, 201)
    kappa = params.gamma / params.ell

    def rhs(_, y):
        q0, ql, v0, vl = y
        force = kappa * (ql - q0)
        return [v0, vl, force / params.m0, -force / params.ml]

    oracle = solve_ivp(rhs, (0, 10), ic, t_eval=t, method="DOP853", rtol=1e-13, atol=1e-14)
    traj = two_mass_limit(params, ic, t)
    assert np.max(np.abs(traj.left - oracle.y[0])) < 1e-9
    assert np.max(np.abs(traj.right - oracle.y[1])) < 1e-9


@pytest.mark.parametrize(
    "params",
    [
        StringParams(rho=1.0, m0=1.0, ml=1.0),
        StringParams(rho=0.0, m0=1.0, ml=1.0, k0=1.0),
        StringParams(rho=0.0, m0=0.0, ml=1.0),
    ],
)
def test_two_mass_limit_preconditions(params):
    with pytest.raises(InvalidLimit):
        two_mass_limit(params, (0, 0, 0, 0), [0.0])
