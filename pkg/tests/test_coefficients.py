import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lpwave.coefficients import (
    CLASS_TAGS,
    EllipticityError,
    coefficient_from_config,
    make_constant,
    make_lipschitz,
    make_loglip_in_t,
    make_resonant,
    make_smooth,
    make_zygmund_in_t,
    validate,
    write_validation_csv,
)

GENERATORS = {
    "constant": lambda: make_constant(1.0),
    "smooth": make_smooth,
    "zygmund_t": make_zygmund_in_t,
    "zygmund_t_2d": lambda: make_zygmund_in_t(dim=2),
    "zygmund_t_triangle": lambda: make_zygmund_in_t(space="triangle"),
    "loglip_t": make_loglip_in_t,
    "lipschitz_t": make_lipschitz,
    "resonant_t": lambda: make_resonant(6),
}


@pytest.mark.parametrize("name", sorted(GENERATORS))
def test_generators_match_their_claims(name):
    c = GENERATORS[name]()
    assert c.class_tag in CLASS_TAGS
    assert validate(c).matches_claims()


def test_zygmund_budgets_frozen():
    c = make_zygmund_in_t()
    assert c.C0 == pytest.approx(3.1947, abs=1e-4)
    assert c.C1 == pytest.approx(0.24995117187500002, rel=1e-12)
    assert c.lambda0 == pytest.approx(1.575223371070904, rel=1e-12)
    rep = validate(c)
    assert rep["zygmund_t"].measured == pytest.approx(2.2362, abs=1e-4)
    assert not rep["lipschitz_t"].passed


def test_resonant_exceeds_zygmund_budget():
    rep = validate(make_resonant(6))
    assert rep["zygmund_t"].measured > 10 * rep["zygmund_t"].budget


def test_two_dimensional_lipschitz_constant():
    c = make_zygmund_in_t(dim=2)
    # sup a(t) times mu_x times the axis-averaged Lipschitz constant 1/sqrt(2)
    assert c.C1 == pytest.approx(0.17674216859833675, rel=1e-12)
    assert c.C1 == pytest.approx(0.25 / np.sqrt(2), rel=1e-3)


def test_entries_symmetric_and_scaled():
    c = make_smooth(dim=2, matrix=[[2.0, 0.5], [0.5, 1.0]])
    ent = c.entries(0.7, 0.2, 1.1)
    np.testing.assert_array_equal(ent, ent.T)
    assert ent[0, 1] == pytest.approx(0.5 * c.scalar(0.7, 0.2, 1.1))


def test_asymmetric_matrix_rejected():
    with pytest.raises(ValueError):
        make_smooth(dim=2, matrix=[[1.0, 0.2], [0.1, 1.0]])


def test_declared_band_too_tight():
    with pytest.raises(EllipticityError):
        make_zygmund_in_t(lambda0=1.9)
    with pytest.raises(EllipticityError):
        make_zygmund_in_t(Lambda0=2.0)


def test_config_unknown_key():
    with pytest.raises(KeyError, match="colour"):
        coefficient_from_config({"class_tag": "smooth", "colour": "red"})


def test_config_builds_resonant():
    c = coefficient_from_config({"class_tag": "resonant_t", "nu": "5", "delta": "0.2"})
    assert c.class_tag == "resonant_t"
    assert c.time_values(0.0) == pytest.approx(2.0)


def test_validation_csv(tmp_path):
    write_validation_csv(tmp_path / "v.csv", validate(make_smooth()))
    lines = (tmp_path / "v.csv").read_text().splitlines()
    assert lines[0] == "hypothesis,passed,measured,budget,witness"
    assert len(lines) == 6


def test_mollified_time_matches_grid():
    c = make_smooth()
    t = 2 * np.pi * np.arange(0, 2**12, 512) / 2**12
    grid = c.mollified_time_grid(2**12, 0.25, 1)[::512]
    quad = c.mollified_time(t, 0.25, 1, nodes=1025)
    np.testing.assert_allclose(grid, quad, atol=1e-5)


@settings(max_examples=20, deadline=None)
@given(amp=st.floats(0.05, 0.9), base=st.floats(1.0, 3.0), mu=st.floats(0.0, 0.5))
def test_zygmund_generator_always_valid(amp, base, mu):
    c = make_zygmund_in_t(amplitude=amp, base=base, mu_x=mu)
    assert c.lambda0 > 0
    rep = validate(c)
    assert rep["ellipticity"].passed
    assert rep["zygmund_t"].passed


@settings(max_examples=20, deadline=None)
@given(t=st.floats(0, 2 * np.pi), x=st.floats(0, 2 * np.pi))
def test_values_inside_ellipticity_band(t, x):
    c = make_loglip_in_t()
    v = float(c.scalar(t, x))
    assert c.lambda0 * (1 - 1e-12) <= v <= c.Lambda0 * (1 + 1e-12)
