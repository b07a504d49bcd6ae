import math

import mpmath
import numpy as np
import pytest

from qpriors.bayes import (
    CLOSED_GAINS,
    MeasurementSpec,
    escort_a,
    info_gain,
    likelihood,
    likelihood_q,
    posterior,
    single_up_gain_closed,
)
from qpriors.errors import ValidationError
from qpriors.priors import build_prior


@pytest.fixture(scope="module")
def pb():
    return build_prior("p_B")


def test_parse_spec():
    s = MeasurementSpec.parse("x:1,1 y:1,1 z:1,1 pow:1/2")
    assert s == MeasurementSpec.canonical(0.5)
    assert MeasurementSpec.parse("z:2,0").counts == ((0, 0), (0, 0), (2, 0))
    assert MeasurementSpec.parse("pow:1").is_constant
    assert MeasurementSpec.parse(s.text()) == s
    for bad in ("z:1", "w:1,1", "pow:-1", "z:1,1 pow:x"):
        with pytest.raises(ValidationError):
            MeasurementSpec.parse(bad)


def test_likelihood_values():
    like = likelihood(MeasurementSpec.parse("z:1,0"))
    # z = r sin(theta1) sin(theta2)
    x = np.array([[0.5], [math.pi / 2], [math.pi / 2]])
    assert like(x)[0] == pytest.approx(0.75)


def test_escort_a_limits():
    assert float(escort_a(1.0, 0.4)) == pytest.approx(1.0)
    assert float(escort_a(2.5, 0.0)) == pytest.approx(2.5)
    assert float(escort_a(2.5, 1e-7)) == pytest.approx(2.5, rel=1e-10)
    q, r = 3.0, 0.6
    w = (1 - r) / (1 + r)
    assert float(escort_a(q, r)) == pytest.approx((1 - w**q) / (r * (1 + w**q)))


def test_escort_likelihood_at_q1_matches():
    spec = MeasurementSpec.canonical()
    x3 = np.array([[0.3, 0.8], [0.4, 2.0], [1.0, 5.0]])
    x4 = np.vstack([np.ones(2), x3])
    assert np.allclose(likelihood_q(spec)(x4), likelihood(spec)(x3))


def test_posterior_normalized(pb):
    post = posterior(pb, likelihood(MeasurementSpec.canonical(0.5)))
    from qpriors.quadrature import integrate

    mass = integrate(post, pb.spec(rel_tol=1e-8)).value
    assert mass == pytest.approx(1.0, abs=1e-7)


def test_constant_spec_gain_is_zero(pb):
    assert info_gain(pb, likelihood(MeasurementSpec.parse("pow:1"))).value == 0.0


@pytest.mark.parametrize(
    "text,expected",
    [("z:1,1", CLOSED_GAINS["pair"]), ("z:2,0", CLOSED_GAINS["two_up"]), ("z:1,0", 0.140186)],
)
def test_gains(pb, text, expected):
    g = info_gain(pb, likelihood(MeasurementSpec.parse(text)), rel_tol=1e-10)
    assert g.value == pytest.approx(expected, abs=1e-6)


def test_single_up_closed_form():
    h = float(mpmath.hyp3f2(0.5, 1, 2, 1.5, 2.5, 1))
    assert single_up_gain_closed(h) == pytest.approx(0.140186, abs=1e-6)


def test_axis_symmetry(pb):
    gx = info_gain(pb, likelihood(MeasurementSpec.parse("x:1,0")), rel_tol=1e-9).value
    gz = info_gain(pb, likelihood(MeasurementSpec.parse("z:1,0")), rel_tol=1e-9).value
    assert gx == pytest.approx(gz, rel=1e-7)


def test_incompatible_prior():
    with pytest.raises(ValidationError):
        info_gain(build_prior("p_Bqext4D"), likelihood(MeasurementSpec.canonical()))
