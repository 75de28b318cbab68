import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lpwave.coefficients import make_constant, make_smooth, make_zygmund_in_t
from lpwave.dyadic import GridFunction, block_multiplier, frequency_magnitude, grid_points
from lpwave.energy import (
    EnergyConfig,
    alpha_symbol,
    build_vwz,
    commutator_vanishing,
    energy_rate,
    lipschitz_constant,
    sobolev_bracket,
    total_energy,
    write_energy_csv,
)


def band_field(n, rng, band):
    mag = frequency_magnitude(n)
    spec = (rng.standard_normal(n) + 1j * rng.standard_normal(n)) * (mag <= band) / (1 + mag)
    return GridFunction.from_spectrum(spec)


def test_config_validation():
    with pytest.raises(ValueError):
        EnergyConfig(theta=1.0)
    with pytest.raises(ValueError):
        EnergyConfig(gamma=0.5)
    assert EnergyConfig.for_grid(256).nu_max == 5
    assert EnergyConfig(nus=(2, 3)).blocks() == (2, 3)


def test_unit_coefficient_reduces_to_blocks(rng):
    n, nu = 128, 3
    u, ut = band_field(n, rng, 40), band_field(n, rng, 40)
    v, w, z = build_vwz(u, ut, alpha_symbol(make_constant(1.0), 0.2, nu, 1.0, n))
    blk = block_multiplier(n, 1, nu)
    mag = frequency_magnitude(n)
    np.testing.assert_allclose(v.spectrum, blk * ut.spectrum, atol=1e-12)
    np.testing.assert_allclose(w.spectrum, np.sqrt(1 + mag**2) * blk * u.spectrum, atol=1e-10)
    np.testing.assert_allclose(z.spectrum, blk * u.spectrum, atol=1e-12)


def test_gamma_mismatch_rejected(rng):
    u = band_field(64, rng, 20)
    with pytest.raises(ValueError):
        build_vwz(u, u, alpha_symbol(make_constant(), 0.0, 2, 1.0, 64), gamma=2.0)


@pytest.mark.parametrize("coef", [make_smooth(), make_zygmund_in_t()])
def test_rate_matches_difference_quotient(coef, rng):
    # along the quadratic curve through (u, u_t, u_tt) at t0 the exact rate is known
    n, t0, h = 64, 0.3, 1e-4
    u0, u1, u2 = (band_field(n, rng, 20) for _ in range(3))
    cfg = EnergyConfig(theta=0.25, gamma=2.0, nu_max=3)
    curve = lambda s: (u0 + u1 * (s - t0) + u2 * (0.5 * (s - t0) ** 2), u1 + u2 * (s - t0))  # noqa: E731
    e_plus = total_energy(*curve(t0 + h), t0 + h, coef, cfg).E_theta
    e_minus = total_energy(*curve(t0 - h), t0 - h, coef, cfg).E_theta
    _, rate = energy_rate(u0, u1, u2, t0, coef, cfg)
    assert rate == pytest.approx((e_plus - e_minus) / (2 * h), rel=1e-4, abs=1e-8)


def test_column_tolerance_agrees(rng):
    n = 128
    x = grid_points(n)
    u = GridFunction(np.exp((np.cos(x - 1) - 1) / 0.3) * np.cos(8 * x))
    ut = u * 0.5
    c = make_zygmund_in_t()
    full = total_energy(u, ut, 0.4, c, EnergyConfig(nus=(2, 3, 4))).E_theta
    fast = total_energy(u, ut, 0.4, c, EnergyConfig(nus=(2, 3, 4), column_tol=1e-13)).E_theta
    assert fast == pytest.approx(full, rel=1e-9)


def test_zero_data_has_zero_energy():
    z = GridFunction(np.zeros(64))
    br = total_energy(z, z, 0.0, make_smooth(), EnergyConfig(nu_max=3))
    assert br.E_theta == 0.0 and br.tail == 0.0


def test_energy_equivalent_to_bracket(rng):
    c = make_zygmund_in_t()
    ratios = []
    for _ in range(4):
        u, ut = band_field(128, rng, 40), band_field(128, rng, 40)
        cfg = EnergyConfig.for_grid(128, theta=0.3)
        br = total_energy(u, ut, 0.5, c, cfg)
        ratios.append(br.E_theta / sobolev_bracket(u, ut, 0.3) ** 2)
    assert 0.05 < min(ratios) and max(ratios) < 20


def test_commutator_far_blocks_vanish():
    n = 256
    x = grid_points(n)
    a = GridFunction(2 + np.cos(x))
    w = GridFunction(np.cos(40 * x) + np.sin(50 * x))
    out = commutator_vanishing(a, w, hs=[2], nus=[0, 1, 2])
    assert out.max() < 1e-12


def test_lipschitz_constant_of_sine():
    n = 1024
    a = GridFunction(np.sin(grid_points(n)))
    assert lipschitz_constant(a) == pytest.approx(1.0, rel=1e-4)


def test_energy_csv(tmp_path, rng):
    u = band_field(64, rng, 20)
    br = total_energy(u, u, 0.0, make_constant(), EnergyConfig(nu_max=2))
    write_energy_csv(tmp_path / "e.csv", [br])
    lines = (tmp_path / "e.csv").read_text().splitlines()
    assert lines[0] == "t,nu,v2,w2,z2,e_nu,E_theta" and len(lines) == 4


@settings(max_examples=15, deadline=None)
@given(seed=st.integers(0, 2**31), scale=st.floats(0.1, 10))
def test_energy_is_quadratic(seed, scale):
    rng = np.random.default_rng(seed)
    u, ut = band_field(64, rng, 20), band_field(64, rng, 20)
    cfg = EnergyConfig(nu_max=3, theta=0.5)
    c = make_smooth()
    e1 = total_energy(u, ut, 0.1, c, cfg).E_theta
    e2 = total_energy(u * scale, ut * scale, 0.1, c, cfg).E_theta
    assert e2 == pytest.approx(scale**2 * e1, rel=1e-10)
