import math

import pytest
from hypothesis import given, strategies as st

from mustring.errors import InvalidParams, ParseError, UnsolvableAlpha, ValidationError
from mustring.model import (
    PRESETS,
    StringParams,
    derive_constants,
    format_config,
    load_config,
    outward_sign,
    parse_config,
    solve_alpha,
)


def test_unit_mass_without_spring_gives_unit_alpha():
    d = derive_constants(StringParams(m0=1.0, k0=0.0))
    assert d.alpha0 == 1.0
    assert d.c0 == 0.0


def test_massless_endpoint_drops_atom():
    d = derive_constants(StringParams(m0=0.0, k0=2.5))
    assert d.alpha0 == 0.0
    assert d.c0 == 0.0


def test_lower_branch_root():
    a = solve_alpha(0.5, 0.2)
    assert 0.0 <= a < 5.0 / 3.0
    assert abs(a * (1 - 0.2 * a) ** 2 - 0.5) < 1e-12


def test_upper_branch_root_exceeds_inverse_spring():
    a = solve_alpha(1.0, 1.0, "upper")
    assert a > 1.0
    assert abs(a * (1 - a) ** 2 - 1.0) < 1e-12


def test_lower_branch_unsolvable_above_peak():
    with pytest.raises(UnsolvableAlpha):
        solve_alpha(1.0, 1.0)


def test_unknown_branch():
    with pytest.raises(InvalidParams):
        solve_alpha(0.1, 0.1, "middle")


@given(
    r=st.one_of(st.just(0.0), st.floats(1e-6, 10.0)),
    frac=st.floats(0.0, 1.0),
)
def test_alpha_residual_and_robin_reconstruction(r, frac):
    mu = frac * (4.0 / (27.0 * r) if r > 0 else 5.0)
    d = derive_constants(StringParams(m0=mu, ml=mu, k0=r, kl=r))
    a = d.alpha0
    assert abs(a * (1 - a * r) ** 2 - mu) < 1e-12 * max(1.0, mu)
    assert 1 - a * r > 0
    if a > 0:
        # c_j/alpha_j gives back r_j/(1 - alpha_j r_j)
        assert math.isclose(d.c0 / a, r / (1 - a * r), rel_tol=1e-12, abs_tol=1e-300)


@given(mu=st.floats(0.01, 50.0), r=st.floats(0.01, 50.0))
def test_upper_branch_always_solvable(mu, r):
    a = solve_alpha(mu, r, "upper")
    assert a > 1.0 / r
    assert abs(a * (1 - a * r) ** 2 - mu) < 1e-12 * max(1.0, mu)


def test_derive_constants_is_deterministic():
    p = PRESETS["light"]
    assert derive_constants(p) == derive_constants(p)


def test_outward_sign():
    assert outward_sign(0) == -1
    assert outward_sign(1) == 1
    with pytest.raises(ValueError):
        outward_sign(2)


@pytest.mark.parametrize("name", ["rho", "gamma", "ell"])
def test_nonpositive_scales_rejected(name):
    with pytest.raises(InvalidParams):
        StringParams(**{name: 0.0}).validate()


def test_negative_mass_rejected():
    with pytest.raises(InvalidParams):
        StringParams(m0=-1.0).validate()


def test_config_baseline(tmp_path):
    path = tmp_path / "base.cfg"
    path.write_text("rho=1\ngamma=1\nell=1\nm0=1\nml=1\nk0=1\nkl=1\n")
    assert load_config(path) == PRESETS["baseline"]


def test_config_defaults_coupling():
    p = parse_config("rho = 2  # density\nm0 = 0.5\n")
    assert p.eps0 == 1 and p.epsl == 1
    assert p.rho == 2.0 and p.m0 == 0.5


def test_config_zero_density_rejected():
    with pytest.raises(ValidationError):
        parse_config("rho = 0\n")


def test_config_unknown_key_reports_line():
    with pytest.raises(ParseError) as info:
        parse_config("rho = 1\nmass = 2\n")
    assert info.value.key == "mass"
    assert info.value.line == 2


def test_config_bad_number():
    with pytest.raises(ParseError):
        parse_config("gamma = fast\n")


def test_config_duplicate_key():
    with pytest.raises(ParseError):
        parse_config("rho = 1\nrho = 2\n")


def test_config_coupling_must_be_binary():
    with pytest.raises(ValidationError):
        parse_config("eps0 = 2\n")


def test_config_round_trip():
    p = PRESETS["light"].with_(eps0=0)
    assert parse_config(format_config(p)) == p


def test_upper_branch_small_spring_keeps_factor():
    # 1 - alpha r is about -sqrt(mu r); computing it by subtraction would cancel to zero
    d = derive_constants(StringParams(m0=1.0, ml=1.0, k0=1e-40, kl=1e-40), branch="upper")
    assert math.isclose(d.boundary_factor(0), -1e-20, rel_tol=1e-6)
    assert math.isclose(d.alpha0 * d.boundary_factor(0) ** 2, 1.0, rel_tol=1e-12)


def test_unrepresentable_alpha_rejected():
    with pytest.raises(InvalidParams):
        derive_constants(StringParams(m0=1.0, k0=5e-324), branch="upper")
