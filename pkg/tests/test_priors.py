import math

import numpy as np
import pytest

from qpriors.config import Config
from qpriors.errors import ValidationError
from qpriors.metrics.closed import bures_trunc_q_integral
from qpriors.priors import (
    BTRUNC_MASS,
    PRIOR_NAMES,
    build_prior,
    custom_prior,
    husimi_q_marginal_raw,
    marginal,
    pure_state_dominance,
)


@pytest.mark.parametrize("name", ["p_B", "p_Btrunc", "p_F", "p_Fq1"])
def test_unit_mass(name, cfg):
    assert build_prior(name, cfg).mass(rel_tol=1e-9).value == pytest.approx(1.0, abs=1e-7)


def test_reference_normalizations(cfg):
    assert build_prior("p_F", cfg).normalization == pytest.approx(1.39350989, rel=1e-7)
    assert build_prior("p_Fq1", cfg).normalization == pytest.approx(0.24559293, rel=1e-7)


def test_bures_conventions(cfg):
    sqrt = build_prior("p_B", cfg)
    assert sqrt.normalization == pytest.approx(math.pi**2 / 8, rel=1e-12)
    r = np.array([0.3, 0.7])
    assert np.allclose(sqrt.radial(r), 4 * r**2 / (math.pi * np.sqrt(1 - r**2)))
    printed = build_prior("p_B", cfg.replace(pb_convention="printed"))
    d = cfg.pb_delta
    assert printed.normalization == pytest.approx(math.pi / 2 * (math.atanh(1 - d) - (1 - d)), rel=1e-9)
    assert printed.r_max == pytest.approx(1 - d)
    assert printed.mass(rel_tol=1e-9).value == pytest.approx(1.0, abs=1e-6)


def test_btrunc_mass(cfg):
    assert build_prior("p_Btrunc", cfg).normalization == pytest.approx(BTRUNC_MASS, rel=1e-10)


def test_4d_normalizations(cfg):
    b4 = build_prior("p_Bqext4D", cfg)
    assert b4.normalization == pytest.approx(BTRUNC_MASS * math.log(1000), rel=1e-8)
    f4 = build_prior("p_Fqext4D", cfg)
    assert f4.normalization == pytest.approx(24.246293561818, rel=1e-6)


def test_zero_outside_ball(cfg):
    p = build_prior("p_B", cfg)
    x = np.array([[0.0, 1.0, 1.2], [1.0, 1.0, 1.0], [0.5, 0.5, 0.5]])
    v = p(x)
    assert v[0] == 0 and v[1] == 0 and np.isfinite(v).all()


def test_infinite_q_range_rejected():
    with pytest.raises(ValidationError):
        build_prior("p_Bqext4D", Config(q_max=math.inf))


def test_unknown_name(cfg):
    with pytest.raises(ValidationError):
        build_prior("p_X", cfg)


def test_bures_r_marginal_closed(cfg):
    b4 = build_prior("p_Bqext4D", cfg)
    grid = np.array([0.05, 0.5, 0.95])
    curve = marginal(b4, "r", grid, normalized=False, rel_tol=1e-11)
    assert np.allclose(curve.values, bures_trunc_q_integral(0.5, 500.0, grid), rtol=1e-7)


def test_bures_q_marginal_closed(cfg):
    b4 = build_prior("p_Bqext4D", cfg)
    grid = np.array([0.5, 1.0, 2.0, 10.0, 400.0])
    curve = marginal(b4, "q", grid, normalized=False, rel_tol=1e-10)
    assert np.allclose(curve.values, BTRUNC_MASS / grid, rtol=1e-6)


def test_marginal_csv(cfg):
    curve = marginal(build_prior("p_F", cfg), "r", [0.25, 0.5])
    lines = curve.csv().splitlines()
    assert lines[0] == "variable,value,density"
    assert len(lines) == 3 and lines[1].startswith("r,0.25,")


def test_marginal_bad_variable(cfg):
    with pytest.raises(ValidationError):
        marginal(build_prior("p_F", cfg), "q")


def test_husimi_peak_value():
    assert husimi_q_marginal_raw(3.59782) == pytest.approx(0.448488, rel=1e-4)
    assert husimi_q_marginal_raw(3.59782) > husimi_q_marginal_raw(3.0)
    assert husimi_q_marginal_raw(3.59782) > husimi_q_marginal_raw(4.2)


def test_custom_prior_and_dominance():
    flat = custom_prior("flat", lambda r: 3 * r**2)
    steep = custom_prior("steep", lambda r: 5 * r**4)
    assert flat.normalization == pytest.approx(4 * math.pi)
    d = pure_state_dominance([flat, steep], expected=("steep", "flat"))
    assert d.matches_expected and d.n_matching == 20
    assert d.near_zero_order == ("flat", "steep")
    assert d.near_zero_is_reverse is True


def test_prior_names():
    assert set(PRIOR_NAMES) == {"p_B", "p_Btrunc", "p_F", "p_Fq1", "p_Bqext4D", "p_Fqext4D"}
