import math

import numpy as np
import pytest

from qpriors import models
from qpriors.errors import DomainError
from qpriors.linalg import eigh, trace
from qpriors.models import AbeRajPoint, BlochPoint, EscortPoint, SpinOneFamilyPoint


def test_bloch_point_validation():
    with pytest.raises(DomainError):
        BlochPoint(1.2, 0.1, 0.1)
    with pytest.raises(DomainError):
        BlochPoint(0.5, 4.0, 0.1)


def test_bloch_rho_eigenvalues():
    p = BlochPoint(0.6, 0.7, 1.3)
    vals = eigh(models.bloch_rho(p)).eigenvalues
    assert np.allclose(vals, [0.2, 0.8])


def test_bloch_cartesian_convention():
    # x = r cos(theta1), y = r sin(theta1) cos(theta2), z = r sin(theta1) sin(theta2)
    x, y, z = models.cartesian(1.0, 0.0, 0.3)
    assert (x, y, z) == pytest.approx((1.0, 0.0, 0.0))
    x, y, z = models.cartesian(1.0, math.pi / 2, math.pi / 2)
    assert (x, y, z) == pytest.approx((0.0, 0.0, 1.0))


@pytest.mark.parametrize("q", [0.5, 1.0, 2.0, 7.0])
def test_escort_rho_is_normalized_power(q):
    p = EscortPoint.of(q, 0.4, 1.0, 2.0)
    rho = models.escort_rho(p)
    assert trace(rho) == pytest.approx(1.0)
    vals = eigh(rho).eigenvalues
    lam = np.array([0.3, 0.7]) ** q
    assert np.allclose(vals, np.sort(lam / lam.sum()))


def test_escort_q_floor():
    with pytest.raises(DomainError):
        EscortPoint.of(0.1, 0.4)


def test_spin1_family():
    p = SpinOneFamilyPoint(0.6, 0.3, 0.5, 0.5)
    rho = models.spin1_rho(p)
    assert rho.shape == (3, 3)
    assert trace(rho) == pytest.approx(1.0)
    assert eigh(rho).eigenvalues.min() >= -1e-14
    with pytest.raises(DomainError):
        SpinOneFamilyPoint(0.3, 0.6, 0.5, 0.5)


def test_aberaj_domain():
    AbeRajPoint(0.1, 4.0)
    with pytest.raises(DomainError):
        AbeRajPoint(0.1, 9.0)
    with pytest.raises(DomainError):
        AbeRajPoint(2.0, 1.0)


@pytest.mark.parametrize("q", [0.5, 1.0, 3.0, 40.0])
@pytest.mark.parametrize("r", [0.01, 0.5, 0.99])
def test_escort_husimi_self_normalized(q, r):
    from qpriors.quadrature import integrate_1d

    p = EscortPoint.of(q, r)
    # density on the c-line, c = cos of the angle to the Bloch vector
    res = integrate_1d(lambda c: models.escort_husimi_value(p, c), -1.0, 1.0, rel_tol=1e-12)
    assert res.value == pytest.approx(1.0, abs=1e-8)


def test_husimi_matches_escort_at_q1():
    b = BlochPoint(0.3, 0.4, 0.5)
    c = np.linspace(-1, 1, 7)
    assert np.allclose(models.husimi_value(b, c), models.escort_husimi_value(EscortPoint.of(1.0, 0.3, 0.4, 0.5), c))


@pytest.mark.parametrize("q", [0.5, 1.0, 2.0, 5.0])
def test_closed_prefactor_ratio(q):
    assert models.printed_escort_prefactor_ratio(q, 0.37) == pytest.approx(2 ** (1 - q), rel=1e-12)
