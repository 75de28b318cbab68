import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lpwave.dyadic import GridFunction, grid_points
from lpwave.regularity import (
    MollifierConfig,
    ResolutionError,
    affine_trend,
    bump,
    direct_seminorms,
    dyadic_indicators,
    is_bounded_profile,
    mollifier_estimate_check,
    mollify,
    mollify_function,
    spread,
    triangle_wave,
    weierstrass,
    write_dyadic_csv,
    write_mollifier_csv,
)
from lpwave.regularity import _weights


def test_bump_frozen_values():
    assert bump(0.0) == pytest.approx(0.8285688398691051, rel=1e-12)
    assert bump(np.array([0.5]))[0] == pytest.approx(0.5936955167320139, rel=1e-12)
    assert bump(np.array([1.0, -1.2]))[0] == 0.0


def test_triangle_wave_values():
    np.testing.assert_allclose(triangle_wave(np.array([0.0, np.pi / 2, np.pi, 3 * np.pi / 2])),
                               [0.0, np.pi / 2, np.pi, np.pi / 2], atol=1e-15)


def test_sine_direct_seminorms():
    x = grid_points(1024)
    rep = direct_seminorms(np.sin(x), 2 * np.pi / 1024)
    assert rep.lip_direct == pytest.approx(1.0, abs=1e-5)
    assert rep.zyg_direct == pytest.approx(0.7458464571561134, rel=1e-10)


def test_triangle_dyadic_profile_frozen():
    rep = dyadic_indicators(GridFunction(triangle_wave(grid_points(1024))))
    row = rep.per_j_profile[1]
    assert row[1] == pytest.approx(1.102659, abs=1e-6)
    assert row[2] == pytest.approx(0.141475, abs=1e-6)


def test_weierstrass_zygmund_but_not_lipschitz():
    rep = dyadic_indicators(GridFunction(weierstrass(grid_points(1024), 8)))
    js, lip, zyg = rep.js[3:], rep.column("grad_Sj_inf")[3:], rep.column("2^j_Dj_inf")[3:]
    slope, r2 = affine_trend(js, lip)
    assert r2 > 0.9 and slope > 0.5
    assert spread(zyg) < 3
    assert not is_bounded_profile(lip, js)


def test_kernel_weight_moments():
    off = np.arange(-40, 41) * 0.01
    w0, w1, w2 = (_weights(off, 0.4, k, bump) for k in (0, 1, 2))
    assert w0.sum() == pytest.approx(1.0, abs=1e-14)
    assert -np.sum(w1 * off) == pytest.approx(1.0, abs=1e-14)
    assert abs(w2.sum()) < 1e-14
    assert np.sum(w2 * off**2 / 2) == pytest.approx(1.0, abs=1e-14)


def test_mollified_sine_derivative():
    val = mollify_function(np.sin, np.array([0.3]), 0.1, 1)[0]
    assert val == pytest.approx(np.cos(0.3), abs=1e-3)


def test_mollifier_too_narrow_raises():
    x = grid_points(64)
    with pytest.raises(ResolutionError):
        mollify(np.sin(x), 2 * np.pi / 64, MollifierConfig(1e-3))


def test_mollifier_spreads_frozen():
    nt = 2**16
    tt = 2 * np.pi * np.arange(nt) / nt
    s = mollifier_estimate_check(weierstrass(tt, 15), 2 * np.pi / nt).spreads
    np.testing.assert_allclose(s, (1.079258623268048, 1.1716773743412057, 1.0575042766232514), rtol=1e-9)


def test_csv_writers(tmp_path):
    x = grid_points(256)
    write_dyadic_csv(tmp_path / "d.csv", dyadic_indicators(GridFunction(np.sin(x))))
    assert (tmp_path / "d.csv").read_text().splitlines()[0] == "j,grad_Sj_inf,2^j_Dj_inf,loglip_ratio"
    tt = 2 * np.pi * np.arange(4096) / 4096
    write_mollifier_csv(tmp_path / "m.csv", mollifier_estimate_check(np.sin(tt), 2 * np.pi / 4096, range(2, 5)))
    assert len((tmp_path / "m.csv").read_text().splitlines()) == 4


@settings(max_examples=25, deadline=None)
@given(c=st.floats(-5, 5), eps_exp=st.integers(2, 6))
def test_mollify_preserves_constants(c, eps_exp):
    n = 2048
    u = np.full(n, c)
    cfg = MollifierConfig(2.0**-eps_exp)
    np.testing.assert_allclose(mollify(u, 2 * np.pi / n, cfg, 0), c, atol=1e-12)
    np.testing.assert_allclose(mollify(u, 2 * np.pi / n, cfg, 1), 0, atol=1e-9)
    np.testing.assert_allclose(mollify(u, 2 * np.pi / n, cfg, 2), 0, atol=1e-6)


@settings(max_examples=25, deadline=None)
@given(slope=st.floats(-3, 3), intercept=st.floats(-3, 3))
def test_affine_trend_recovers_line(slope, intercept):
    x = np.arange(8.0)
    got, r2 = affine_trend(x, slope * x + intercept)
    assert got == pytest.approx(slope, abs=1e-9)
