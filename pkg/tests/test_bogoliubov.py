import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

import mustring.bogoliubov as bg
from mustring.errors import InvalidParams, NotSpacelike

ROBIN = bg.FieldBC.robin(0.5, 0.7)


@pytest.fixture(scope="module")
def modes():
    return bg.exp_modes(ROBIN, 80)


# modes -------------------------------------------------------------------------------


def test_dirichlet_frequencies():
    modes = bg.exp_modes(bg.FieldBC.dirichlet(), 10)
    assert np.allclose([m.omega for m in modes], np.arange(1, 11) * math.pi, rtol=1e-14)


def test_dirichlet_frequency_equation_is_sine():
    bc = bg.FieldBC.dirichlet(ell=1.3)
    w = np.linspace(0.1, 20, 40)
    assert np.allclose(bc.frequency_equation(w), -0.25 * np.sin(w * 1.3))


def test_neumann_frequencies_with_zero_mode():
    modes = bg.exp_modes(bg.FieldBC.robin(0.0, 0.0), 8)
    assert modes[0].zero and modes[0].k == 0
    assert np.allclose([m.omega for m in modes[1:]], np.arange(1, 8) * math.pi, rtol=1e-14)
    assert math.isclose(float(modes[0].X(0.4)), 1 / math.sqrt(2.0))


def test_robin_asymptotics(modes):
    for mode in modes[-10:]:
        k = mode.k
        assert k**3 * abs(mode.omega - bg.asymptotic_frequency(k, ROBIN)) < 2.0


def test_modes_normalized_to_inverse_twice_frequency(modes):
    x, w = np.polynomial.legendre.leggauss(200)
    x, w = 0.5 * (x + 1), 0.5 * w
    for mode in modes[:10]:
        assert math.isclose(np.sum(w * mode.X(x) ** 2), 1 / (2 * mode.omega), rel_tol=1e-12)


def test_modes_satisfy_robin_ends(modes):
    for mode in modes[:10]:
        # X' = r0 X at 0 and X' = -rl X at ell
        assert abs(mode.X(0.0, 1) - 0.5 * mode.X(0.0)) < 1e-10 * mode.omega
        assert abs(mode.X(1.0, 1) + 0.7 * mode.X(1.0)) < 1e-10 * mode.omega


def test_negative_robin_rejected():
    with pytest.raises(InvalidParams):
        bg.FieldBC.robin(-0.1, 0.0)


def test_mode_count_must_be_positive():
    with pytest.raises(InvalidParams):
        bg.exp_modes(ROBIN, 0)


# embeddings ------------------------------------------------------------------------


def test_tilted_boundary_slopes():
    X = bg.tilted(0.3, -0.2)
    assert np.allclose(X.boundary_slopes(), (0.3, -0.2))


def test_bump_is_flat_at_ends():
    assert np.allclose(bg.bump(0.2).boundary_slopes(), (0.0, 0.0), atol=1e-15)


def test_timelike_embedding_rejected():
    with pytest.raises(NotSpacelike):
        bg.tilted(1.5)


def test_embedding_presets():
    assert bg.embedding_preset("flat").name == "flat:0.0"
    assert np.allclose(bg.embedding_preset("tilted:0.3,0.1").boundary_slopes(), (0.3, 0.1))
    with pytest.raises(InvalidParams):
        bg.embedding_preset("wiggly:1")
    with pytest.raises(InvalidParams):
        bg.embedding_preset("bump")


def test_reparametrization_must_be_monotone():
    with pytest.raises(InvalidParams):
        bg.sine_reparametrization(1.0)


# pairing ----------------------------------------------------------------------------


@pytest.mark.parametrize("X", [bg.flat(0.0), bg.flat(2.1), bg.tilted(0.3, -0.2), bg.bump(0.2)], ids=lambda X: X.name)
def test_pairing_gram_is_identity(modes, X):
    pp, pm, _ = bg.pairing_gram(modes[:20], X)
    assert np.max(np.abs(pp - np.eye(20))) < 1e-8
    assert np.max(np.abs(pm)) < 1e-8


def test_pairing_of_basis_solutions(modes):
    X = bg.tilted(0.2)
    plus = bg.ModeSolution.basis(modes[:5], 2)
    minus = bg.ModeSolution.basis(modes[:5], 2, eta=-1)
    other_minus = bg.ModeSolution.basis(modes[:5], 4, eta=-1)
    assert abs(bg.kg_pairing(plus, plus, X).value - 1) < 1e-9
    assert abs(bg.kg_pairing(minus, minus, X).value + 1) < 1e-9
    assert abs(bg.kg_pairing(plus, minus, X).value) < 1e-9
    assert abs(bg.kg_pairing(plus, other_minus, X).value) < 1e-9


def test_neumann_zero_mode_pairs_to_one():
    modes = bg.exp_modes(bg.FieldBC.robin(0.0, 0.0), 6)
    pp, pm, _ = bg.pairing_gram(modes, bg.tilted(0.2, 0.1))
    assert np.max(np.abs(pp - np.eye(6))) < 1e-8
    assert np.max(np.abs(pm)) < 1e-8


@given(st.integers(0, 2**32 - 1))
def test_pairing_independent_of_slice(seed):
    rng = np.random.default_rng(seed)
    modes = bg.exp_modes(ROBIN, 10)
    draw = lambda: rng.normal(size=10) + 1j * rng.normal(size=10)
    a = bg.ModeSolution(tuple(modes), draw(), draw())
    b = bg.ModeSolution(tuple(modes), draw(), draw())
    on_flat = bg.kg_pairing(a, b, bg.flat(0.0)).value
    on_tilted = bg.kg_pairing(a, b, bg.tilted(0.3, -0.2)).value
    assert abs(on_flat - on_tilted) < 1e-6 * max(1.0, abs(on_flat))


# Bogoliubov coefficients --------------------------------------------------------------


def test_identical_slices_have_no_beta(modes):
    X = bg.tilted(0.3)
    mats = bg.bogoliubov_matrices(X, X, modes[:20])
    assert np.max(np.abs(mats.beta)) < 1e-8
    assert np.max(np.abs(mats.gamma - np.eye(20))) < 1e-8


def test_flat_slices_evolve_by_phases(modes):
    t = 1.3
    mats = bg.bogoliubov_matrices(bg.flat(0.0), bg.flat(t), modes[:20])
    assert np.max(np.abs(mats.beta)) < 1e-10
    omega = np.array([m.omega for m in modes[:20]])
    assert np.max(np.abs(mats.gamma - np.diag(np.exp(1j * omega * t)))) < 1e-9


def test_beta_pieces_match_matrix_route(modes):
    I, F = bg.flat(0.0), bg.tilted(0.3, -0.2)
    mats = bg.bogoliubov_matrices(I, F, modes[:20])
    for n, m in [(0, 0), (3, 7), (12, 5), (19, 19)]:
        assert abs(bg.beta_entry(I, F, n, m, modes) - mats.beta[n, m]) < 1e-10


def test_beta_entry_rejects_zero_mode():
    modes = bg.exp_modes(bg.FieldBC.robin(0.0, 0.0), 3)
    with pytest.raises(InvalidParams):
        bg.beta_entry(bg.flat(), bg.tilted(0.2), 0, 1, modes)


def test_beta_leading_form_at_large_frequencies(modes):
    I, F = bg.flat(0.0), bg.tilted(0.3)
    for n, m in [(20, 20), (30, 25), (40, 39), (60, 50)]:
        exact = bg.beta_entry(I, F, n, m, modes)
        leading = bg.beta_leading(I, F, n, m, modes)
        order = modes[n].k + modes[m].k
        assert abs(leading - exact) / abs(exact) < 2.0 / order


def test_reparametrization_invariance(modes):
    I, F = bg.flat(0.0), bg.tilted(0.3, -0.2)
    s = bg.sine_reparametrization(0.4)
    a = bg.bogoliubov_matrices(I, F, modes[:20])
    b = bg.bogoliubov_matrices(I.reparametrize(s), F.reparametrize(s), modes[:20])
    assert np.max(np.abs(a.beta - b.beta)) < 1e-8
    assert np.max(np.abs(a.gamma - b.gamma)) < 1e-8


def test_transport_closes_for_unitary_pair(modes):
    I, F = bg.flat(0.0), bg.bump(0.2)
    forward = bg.bogoliubov_matrices(I, F, modes)
    backward = bg.bogoliubov_matrices(F, I, modes)
    rng = np.random.default_rng(11)
    a = np.zeros(len(modes), dtype=complex)
    a[:10] = rng.normal(size=10) + 1j * rng.normal(size=10)
    back = backward.transport(forward.transport(a))
    assert np.max(np.abs(back - a)[:10]) < 1e-6 * np.max(np.abs(a))


def test_transport_reuses_cauchy_data(modes):
    # the transported solution carries on X_F the data the original carries on X_I
    I, F = bg.flat(0.0), bg.bump(0.2)
    mats = bg.bogoliubov_matrices(I, F, modes)
    a = np.zeros(len(modes), dtype=complex)
    a[:4] = [1.0, 0.5j, -0.3, 0.2 + 0.1j]
    sigma = np.linspace(0.05, 0.95, 19)
    q_I, p_I = bg.ModeSolution.real(modes, a).data_on(I, sigma)
    q_F, p_F = bg.ModeSolution.real(modes, mats.transport(a)).data_on(F, sigma)
    assert np.max(np.abs(q_F - q_I)) < 1e-5
    assert np.max(np.abs(p_F - p_I)) < 1e-3


# kernel -------------------------------------------------------------------------------


def test_kernel_identical_embeddings():
    X = bg.tilted(0.3, 0.1)
    sigma = np.linspace(0, 1, 11)
    k = bg.kernel_quantities(X, X, sigma, 3.0, 5.0)
    assert np.all(k.B == 0.0)
    assert np.allclose(k.A, k.N_I) and np.allclose(k.A, k.N_F)


def test_kernel_flat_slices():
    sigma = np.linspace(0, 1, 11)
    k = bg.kernel_quantities(bg.flat(0.0), bg.flat(1.0), sigma, 3.0, 5.0)
    assert np.all(k.B == 0.0) and np.all(k.A > 0)


def test_kernel_slope_mismatch():
    I, F = bg.flat(0.0), bg.tilted(0.3)
    k = bg.kernel_quantities(I, F, 0.0, 3.0, 5.0)
    # B = t'_I x'_F - t'_F x'_I
    assert math.isclose(float(k.B), -0.3)
    same = bg.kernel_quantities(bg.tilted(0.3), F, 0.0, 3.0, 5.0)
    assert float(same.B) == 0.0


@given(st.floats(0.5, 40.0), st.floats(0.5, 40.0), st.floats(0.0, 1.0))
def test_kernel_light_cone_identity(wl, wm, s):
    I, F = bg.tilted(0.3, -0.2), bg.bump(0.15)
    k = bg.kernel_quantities(I, F, s, wl, wm)
    aI, bI, daI, dbI = bg._light_cone(I, s)
    aF, bF, daF, dbF = bg._light_cone(F, s)
    lhs = (wl * daI + wm * daF) * (wl * dbI + wm * dbF)
    assert math.isclose(float(lhs), float(-((wl + wm) ** 2) / k.f_tau), rel_tol=1e-12)


# classification -------------------------------------------------------------------------


def test_dyadic_counts():
    assert bg.dyadic_counts(10, 80) == (10, 20, 40, 80, 160)


def test_equal_embeddings_unitary():
    X = bg.flat(0.0)
    c = bg.unitarity_classification(X, X, ROBIN, N=20)
    assert c.decision == "Unitary"
    assert max(c.partial_sums) < 1e-12
    assert c.evidence_agrees


def test_inertial_slices_unitary():
    c = bg.unitarity_classification(bg.flat(0.0), bg.flat(0.8), ROBIN, N=20)
    assert c.decision == "Unitary" and c.evidence_agrees


def test_tilted_slice_not_unitary():
    c = bg.unitarity_classification(bg.flat(0.0), bg.tilted(0.3), ROBIN, N=40)
    assert c.decision == "NonUnitary"
    assert c.evidence_agrees
    assert min(c.increments) >= c.floor > 0
    assert c.to_dict()["decision"] == "NonUnitary"


def test_curved_slice_with_flat_ends_unitary():
    c = bg.unitarity_classification(bg.flat(0.0), bg.bump(0.2), ROBIN, N=40)
    assert c.decision == "Unitary"
    assert c.evidence_agrees
    assert all(np.diff(c.increments) < 0)
