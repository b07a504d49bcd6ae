import numpy as np
import pytest

from qpriors.errors import DomainError, ValidationError
from qpriors.linalg import check_hermitian, eigh, frobenius_distance, matrix_power, trace


def random_density(rng, d):
    a = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    m = a @ a.conj().T
    return m / np.trace(m).real


@pytest.mark.parametrize("d", [2, 3, 4])
def test_eigh_reconstructs(rng, d):
    for _ in range(20):
        m = random_density(rng, d)
        es = eigh(m)
        assert np.all(np.diff(es.eigenvalues) >= 0)
        assert np.allclose(es.reconstruct(), m, atol=1e-13)
        assert np.allclose(es.eigenvectors.conj().T @ es.eigenvectors, np.eye(d), atol=1e-13)


def test_eigh_2x2_degenerate():
    es = eigh(np.eye(2) / 2)
    assert np.allclose(es.eigenvalues, [0.5, 0.5])
    assert np.allclose(es.reconstruct(), np.eye(2) / 2)


def test_check_hermitian_rejects():
    with pytest.raises(ValidationError):
        check_hermitian(np.array([[1, 1], [0, 1]], dtype=complex))
    with pytest.raises(ValidationError):
        check_hermitian(np.ones((2, 3)))


def test_matrix_power(rng):
    m = random_density(rng, 3)
    assert np.allclose(matrix_power(m, 1.0), m, atol=1e-13)
    assert np.allclose(matrix_power(m, 2.0), m @ m, atol=1e-13)
    half = matrix_power(m, 0.5)
    assert np.allclose(half @ half, m, atol=1e-12)


def test_matrix_power_rejects_negative():
    with pytest.raises(DomainError):
        matrix_power(np.diag([1.0, -0.5]), 0.5)


def test_trace_and_distance(rng):
    m = random_density(rng, 4)
    assert trace(m) == pytest.approx(1.0)
    assert frobenius_distance(m, m) == 0.0
