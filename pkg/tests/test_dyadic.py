import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lpwave.dyadic import (
    GridFunction,
    ParamSobolevConfig,
    TruncationError,
    bernstein_check,
    block_multiplier,
    block_support,
    chi,
    dyadic_block,
    frequency_magnitude,
    grid_points,
    j_max,
    load_grid_function,
    lp_decompose,
    lp_sobolev_sum,
    save_grid_function,
    sobolev_equivalence_constant,
    sobolev_norm,
    sobolev_norm_gamma,
    varphi,
)


def band_limited(n, rng, band):
    mag = frequency_magnitude(n)
    spec = (rng.standard_normal(n) + 1j * rng.standard_normal(n)) * (mag <= band)
    return GridFunction.from_spectrum(spec)


def test_cutoff_frozen_values():
    assert chi(1.0) == 1.0
    assert chi(1.9) == 0.0
    assert chi(1.5) == pytest.approx(0.5, abs=1e-15)
    assert chi(1.3) == pytest.approx(0.935030830871336, rel=1e-12)
    assert varphi(1.0) == 1.0


def test_block_geometry():
    assert j_max(1024) == 8
    assert j_max(256) == 6
    assert block_support(3) == pytest.approx((4.4, 15.2))
    assert block_support(0) == (0.0, 1.9)


def test_block_beyond_jmax_raises():
    u = GridFunction(np.ones(64))
    with pytest.raises(TruncationError):
        dyadic_block(u, j_max(64) + 1)


def test_partition_of_unity_on_retained_band():
    n = 512
    total = sum(block_multiplier(n, 1, j) for j in range(j_max(n) + 1))
    keep = frequency_magnitude(n) <= 1.1 * 2.0 ** j_max(n)
    np.testing.assert_allclose(total[keep], 1.0, atol=1e-15)


def test_cosine_sobolev_norm_closed_form():
    x = grid_points(128)
    u = GridFunction(np.cos(3 * x))
    for s in (-1.0, 0.0, 0.5, 2.0):
        assert sobolev_norm(u, s) == pytest.approx(np.sqrt(np.pi * 10.0**s), rel=1e-13)
    assert sobolev_norm_gamma(u, ParamSobolevConfig(s=1.0, gamma=4.0)) == pytest.approx(np.sqrt(np.pi * 25), rel=1e-13)


def test_l2_norm_matches_quadrature():
    x = grid_points(64)
    u = GridFunction(np.sin(x) + 0.5 * np.cos(4 * x))
    assert u.norm() == pytest.approx(np.sqrt(np.pi * 1.25), rel=1e-13)


def test_gamma_below_one_rejected():
    with pytest.raises(ValueError):
        ParamSobolevConfig(s=1.0, gamma=0.5)


def test_exact_equivalence_constants_frozen():
    assert sobolev_equivalence_constant(256, 1.0) == pytest.approx(2.398594584031142, rel=1e-12)
    assert sobolev_equivalence_constant(512, -0.5) == pytest.approx(1.9187082128622877, rel=1e-12)


def test_bernstein_ratio_on_block(rng):
    u = dyadic_block(band_limited(256, rng, 100), 4)
    rep = bernstein_check(u, 4)
    assert 0.55 <= rep.lower_ratio <= 1.9


def test_save_load_roundtrip(tmp_path, rng):
    u = band_limited(64, rng, 20)
    save_grid_function(tmp_path / "u.bin", u)
    v = load_grid_function(tmp_path / "u.bin")
    np.testing.assert_array_equal(u.samples, v.samples)


def test_load_rejects_bad_magic(tmp_path):
    p = tmp_path / "bad.bin"
    p.write_bytes(b"XXXX" + bytes(40))
    with pytest.raises(ValueError):
        load_grid_function(p)


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), log_n=st.integers(5, 10))
def test_reconstruction_property(seed, log_n):
    n = 2**log_n
    u = band_limited(n, np.random.default_rng(seed), 1.1 * 2.0 ** j_max(n))
    dec = lp_decompose(u)
    err = np.linalg.norm(dec.reconstruct().spectrum - u.spectrum) / np.linalg.norm(u.spectrum)
    assert err <= 1e-12
    assert dec.truncation <= 1e-15


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), s=st.sampled_from([-1.0, -0.5, 0.0, 0.5, 1.0]))
def test_block_sum_within_exact_constant(seed, s):
    n = 256
    u = band_limited(n, np.random.default_rng(seed), 1.1 * 2.0 ** j_max(n))
    c = sobolev_equivalence_constant(n, s)
    r = lp_sobolev_sum(u, s) / sobolev_norm(u, s) ** 2
    assert 1 / c - 1e-12 <= r <= c + 1e-12


@settings(max_examples=20, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), j=st.integers(0, 6))
def test_block_spectrum_inside_annulus(seed, j):
    u = band_limited(256, np.random.default_rng(seed), 128)
    b = dyadic_block(u, j)
    lo, hi = block_support(j)
    mag = frequency_magnitude(256)
    outside = (mag >= hi) | ((mag <= lo) & (lo > 0))
    assert np.all(b.spectrum[outside] == 0)
