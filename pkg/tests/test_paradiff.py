import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lpwave.coefficients import make_smooth, make_zygmund_in_t
from lpwave.dyadic import GridFunction, frequency_magnitude, grid_points, low_pass_multiplier
from lpwave.paradiff import (
    GAMMA_LADDER,
    adjoint_remainder,
    apply,
    boundedness_ratio,
    composition_remainder,
    dense_matrix,
    kernel_diagnostics,
    load_symbol,
    make_param_weight,
    multiplier_symbol,
    operator_norm,
    paraproduct,
    positivity_check,
    save_symbol,
    smooth_symbol,
    time_derivative_scaling,
    usual_paraproduct,
    write_kernel_csv,
)
from lpwave.regularity import triangle_wave


def random_state(n, rng, band):
    mag = frequency_magnitude(n)
    return GridFunction.from_spectrum((rng.standard_normal(n) + 1j * rng.standard_normal(n)) * (mag <= band))


def test_gamma_ladder():
    assert GAMMA_LADDER[0] == 1 and GAMMA_LADDER[-1] == 4096 and len(GAMMA_LADDER) == 13


@pytest.mark.parametrize("gamma", [1.0, 4.0, 64.0])
def test_weight_constants_frozen(gamma):
    eps1, eps2 = make_param_weight(gamma).constants()
    assert 0.068 <= eps1 <= 0.071
    assert eps2 == pytest.approx(0.938, abs=1e-9)
    lit1, lit2 = make_param_weight(gamma, "literal").constants()
    assert lit2 == pytest.approx(1.2, abs=1e-9)


def test_weight_is_one_at_zero_eta():
    w = make_param_weight(8.0)
    xi = np.linspace(0, 500, 101)
    np.testing.assert_allclose(w(np.zeros_like(xi), xi), 1.0, atol=1e-15)


def test_unknown_variant():
    with pytest.raises(ValueError):
        make_param_weight(2.0, "other")(0.0, 0.0)
    with pytest.raises(ValueError):
        make_param_weight(0.5)


def test_kernel_rows_frozen():
    rep = kernel_diagnostics(4.0, [3.0, 24.0])
    xi, l1, mom, dxi, zero = rep.rows[1]
    assert l1 == pytest.approx(1.248766945191396, rel=1e-9)
    assert mom == pytest.approx(15.472744050552048, rel=1e-9)
    assert dxi == pytest.approx(6.261837508210598, rel=1e-9)
    assert zero < 1e-12
    assert rep.rows[0][1] == pytest.approx(1.4359914125861066, rel=1e-9)


def test_kernel_csv(tmp_path):
    write_kernel_csv(tmp_path / "k.csv", [kernel_diagnostics(1.0, [2.0, 5.0])])
    assert (tmp_path / "k.csv").read_text().splitlines()[0] == "gamma,xi,l1,moment,dxi_l1,zero_mean"


@pytest.mark.parametrize("gamma", [1.0, 4.0, 16.0])
def test_paraproduct_equals_smoothed_symbol(gamma, rng):
    n = 128
    x = grid_points(n)
    a = GridFunction(1 + 0.5 * np.sin(x) + 0.1 * rng.standard_normal(n))
    u = random_state(n, rng, n / 4)
    sym = smooth_symbol(np.repeat(a.samples[:, None], n, 1), gamma, n)
    p = paraproduct(a, u, gamma)
    assert np.linalg.norm(apply(sym, u).samples - p.samples) <= 1e-12 * np.linalg.norm(p.samples)


def test_paraproduct_of_constant(rng):
    u = random_state(128, rng, 40)
    c = GridFunction(np.full(128, 3.0))
    np.testing.assert_allclose(paraproduct(c, u, 8.0).samples, 3 * u.samples, atol=1e-12)
    mag = frequency_magnitude(128)
    high = GridFunction.from_spectrum(u.spectrum * (mag >= 20))
    np.testing.assert_allclose(usual_paraproduct(c, high).samples, 3 * high.samples, atol=1e-12)


def test_usual_paraproduct_differs_by_mean_term(rng):
    n = 128
    x = grid_points(n)
    a = GridFunction(2 + np.sin(x) + 0.3 * np.cos(5 * x))
    u = GridFunction(rng.standard_normal(n))
    s2 = u.apply_multiplier(low_pass_multiplier(n, 1, 2))
    diff = paraproduct(a, u, 1.0) - usual_paraproduct(a, u)
    np.testing.assert_allclose(diff.samples, a.samples.mean() * s2.samples, atol=1e-12)


def test_multiplier_symbol_is_fourier_multiplier(rng):
    n = 64
    u = random_state(n, rng, 20)
    sym = multiplier_symbol(lambda xi: 1 + xi**2, 1.0, n, order=2)
    np.testing.assert_allclose(apply(sym, u).samples, (u - u.derivative(order=2)).samples, atol=1e-9)


def test_dense_matrix_matches_apply(rng):
    n = 64
    sym = smooth_symbol(lambda x, xi: np.cos(x) * np.sqrt(1 + xi**2), 2.0, n, order=1)
    u = random_state(n, rng, 16)
    out = dense_matrix(sym) @ u.spectrum
    np.testing.assert_allclose(out, apply(sym, u).spectrum, atol=1e-12)


def test_operator_norm_of_diagonal():
    m = np.diag([1.0, 3.0, -7.0, 2.0])
    assert operator_norm(m) == pytest.approx(7.0, rel=1e-6)


def test_constant_symbol_remainders_vanish_exactly():
    for g in (1.0, 16.0):
        assert composition_remainder(lambda x, xi: 1.3 + 0 * x + 0 * xi, lambda x, xi: 0.7 + 0 * x + 0 * xi,
                                     0.0, g, 64, exact=True) == 0.0
        assert adjoint_remainder(lambda x, xi: (2 + 1j) + 0 * x + 0 * xi, g, 64, 0.0, exact=True) == 0.0


def test_order_one_composition_bounded():
    tri = lambda x: 1 + 0.5 * (2 / np.pi * triangle_wave(x) - 1)  # noqa: E731
    vals = [composition_remainder(lambda x, xi, g=g: tri(x) * np.sqrt(g**2 + xi**2),
                                  lambda x, xi: (2 - tri(x)) + 0 * xi, 0.0, g, 128, m=1)
            for g in (1.0, 8.0, 64.0)]
    assert max(vals) / min(vals) < 10


def test_zeroth_order_boundedness(rng):
    sym = smooth_symbol(lambda x, xi: 2 + np.sin(x) + 0 * xi, 4.0, 64)
    r = boundedness_ratio(sym, 0.5, samples=10)
    assert r.max() < 4


def test_constant_positive_at_gamma_one():
    rep = positivity_check(lambda x, xi, g: 1.5 + 0 * x + 0 * xi, 1.5, n=64)
    assert rep.gamma_pass == 1.0
    assert rep.min_ratio[1.0] == pytest.approx(2.0, rel=1e-9)


def test_elliptic_second_order_symbol_positive():
    c = make_zygmund_in_t(space="triangle", mu_x=0.3)
    rep = positivity_check(lambda x, xi, g: c.scalar(0.4, x) * (g**2 + xi**2), c.lambda0, n=64, order=2)
    assert rep.gamma_pass is not None
    assert rep.worst_case[rep.gamma_pass] >= 1


def test_time_derivative_scaling_smooth_decays():
    rows = time_derivative_scaling(make_smooth(), 1.0, [2, 4, 6], n=32)
    second = [r[2] for r in rows]
    assert second[-1] < second[0]


def test_symbol_roundtrip(tmp_path):
    sym = smooth_symbol(lambda x, xi: np.cos(x) + 1j * xi, 2.0, 32, order=1)
    save_symbol(tmp_path / "s.bin", sym)
    back = load_symbol(tmp_path / "s.bin")
    np.testing.assert_array_equal(back.table, sym.table)
    np.testing.assert_array_equal(back.xi_idx, sym.xi_idx)
    assert back.gamma == sym.gamma and back.order == sym.order


@settings(max_examples=20, deadline=None)
@given(seed=st.integers(0, 2**31), c1=st.floats(-2, 2), c2=st.floats(-2, 2))
def test_smoothing_is_linear(seed, c1, c2):
    rng = np.random.default_rng(seed)
    n = 32
    t1 = rng.standard_normal((n, n))
    t2 = rng.standard_normal((n, n))
    s = smooth_symbol(c1 * t1 + c2 * t2, 4.0, n).table
    s12 = c1 * smooth_symbol(t1, 4.0, n).table + c2 * smooth_symbol(t2, 4.0, n).table
    np.testing.assert_allclose(s, s12, atol=1e-12)


@settings(max_examples=20, deadline=None)
@given(seed=st.integers(0, 2**31), gamma=st.sampled_from([1.0, 2.0, 8.0]))
def test_x_independent_symbol_unchanged(seed, gamma):
    rng = np.random.default_rng(seed)
    row = rng.standard_normal(32)
    tab = np.repeat(row[None, :], 32, axis=0)
    np.testing.assert_array_equal(smooth_symbol(tab, gamma, 32).table, tab)
