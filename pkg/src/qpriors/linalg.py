"""Small dense Hermitian linear algebra (dimension 2 to 4).

Matrices are plain complex ``numpy`` arrays. Dimension 2 uses a closed-form
eigensolver; dimensions 3 and 4 go through LAPACK (``numpy.linalg.eigh``).
Either way the output ordering and eigenvector phases are normalized so that
results are deterministic.
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np

from .errors import DomainError, ValidationError

HERMITIAN_ATOL = 1e-12
NEGATIVE_EIG_TOL = 1e-12
DEGENERACY_GAP = 1e-12


class EigenSystem(NamedTuple):
    """Eigenvalues in ascending order and matching orthonormal columns."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def reconstruct(self) -> np.ndarray:
        v = self.eigenvectors
        return (v * self.eigenvalues) @ v.conj().T


def check_hermitian(m, atol: float = HERMITIAN_ATOL) -> np.ndarray:
    """Return ``m`` as a complex array after validating shape and symmetry.

    Raises ValidationError naming the first offending entry pair.
    """
    a = np.asarray(m, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValidationError(f"expected a square matrix, got shape {a.shape}")
    if not 2 <= a.shape[0] <= 4:
        raise ValidationError(f"dimension {a.shape[0]} outside supported range 2..4")
    if not np.all(np.isfinite(a)):
        raise ValidationError("matrix has non-finite entries")
    diff = np.abs(a - a.conj().T)
    if diff.max() > atol:
        i, j = np.unravel_index(np.argmax(diff), diff.shape)
        i, j = sorted((int(i), int(j)))
        raise ValidationError(
            f"matrix is not Hermitian: entries ({i},{j}) and ({j},{i}) differ by {diff[i, j]:.3e}"
        )
    return a


def _fix_phases(v: np.ndarray) -> np.ndarray:
    # largest-magnitude component of each column made real positive
    idx = np.argmax(np.abs(v), axis=0)
    pivots = v[idx, np.arange(v.shape[1])]
    return v * (np.abs(pivots) / pivots)


def _eigh2(a: np.ndarray) -> EigenSystem:
    p, d = a[0, 0].real, a[1, 1].real
    b = a[0, 1]
    mean = 0.5 * (p + d)
    half = 0.5 * (p - d)
    rad = np.hypot(half, abs(b))
    lo, hi = mean - rad, mean + rad
    scale = max(abs(p), abs(d), abs(b), 1.0)
    if rad <= DEGENERACY_GAP * scale:
        return EigenSystem(np.array([lo, hi]), np.eye(2, dtype=complex))
    vecs = []
    for lam in (lo, hi):
        # two candidate null vectors of (a - lam I); keep the better conditioned
        c1 = np.array([b, lam - p], dtype=complex)
        c2 = np.array([lam - d, np.conj(b)], dtype=complex)
        c = c1 if np.linalg.norm(c1) >= np.linalg.norm(c2) else c2
        vecs.append(c / np.linalg.norm(c))
    v = np.column_stack(vecs)
    return EigenSystem(np.array([lo, hi]), _fix_phases(v))


def eigh(m) -> EigenSystem:
    """Spectral decomposition of a small Hermitian matrix.

    Eigenvalues ascend; each eigenvector has its largest-magnitude component
    real and positive. Within a degenerate eigenspace any orthonormal basis
    may be returned.
    """
    a = check_hermitian(m)
    if a.shape[0] == 2:
        return _eigh2(a)
    w, v = np.linalg.eigh(a)
    return EigenSystem(w, _fix_phases(v))


def matrix_power(m, q: float) -> np.ndarray:
    """``m**q`` for positive semidefinite ``m`` via its eigensystem."""
    es = eigh(m)
    lam = es.eigenvalues
    if lam[0] < -NEGATIVE_EIG_TOL:
        raise DomainError(f"matrix has negative eigenvalue {lam[0]:.3e}")
    lam = np.clip(lam, 0.0, None)
    if q <= 0 and np.any(lam == 0.0):
        raise DomainError(f"power q={q} undefined for a singular matrix")
    if q == 1:
        return check_hermitian(m).copy()
    with np.errstate(divide="ignore"):
        powered = np.where(lam > 0, lam**q, 0.0)
    v = es.eigenvectors
    out = (v * powered) @ v.conj().T
    return 0.5 * (out + out.conj().T)


def trace(m) -> float:
    a = np.asarray(m)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValidationError(f"expected a square matrix, got shape {a.shape}")
    return float(np.trace(a).real)


def frobenius_distance(a, b) -> float:
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape != b.shape:
        raise ValidationError(f"dimension mismatch: {a.shape} vs {b.shape}")
    return float(np.linalg.norm(a - b))
