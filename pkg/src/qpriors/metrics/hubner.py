"""Numeric Bures metric from a parameterized density-matrix family.

For rho with eigen-decomposition sum_i lambda_i |i><i|,

    g_ab = sum_ij  Re(<i|d_a rho|j> <j|d_b rho|i>) / (2 (lambda_i + lambda_j))

with d_a rho from central finite differences.
"""

from __future__ import annotations

import numpy as np

from .. import linalg
from ..errors import DomainError, SingularStateError, ValidationError
from ..models import DensityFamily
from .tensor import MetricTensor

MIN_EIGENVALUE = 1e-10
DEFAULT_STEP = 1e-5


def _derivatives(family: DensityFamily, x: np.ndarray, step: float, richardson: bool):
    out = []
    for a in range(len(x)):
        h = step * max(abs(x[a]), 1.0)
        e = np.zeros_like(x)
        e[a] = 1.0

        def central(hh):
            return (family(x + hh * e) - family(x - hh * e)) / (2 * hh)

        d = central(h)
        if richardson:
            d = (4 * central(h / 2) - d) / 3
        out.append(d)
    return out


def hubner_metric(
    family: DensityFamily, params, step: float = DEFAULT_STEP, method: str = "central"
) -> MetricTensor:
    """Bures metric tensor of ``family`` at ``params``.

    ``method`` is ``"central"`` or ``"richardson"`` (one extrapolation level).
    """
    if method not in ("central", "richardson"):
        raise ValidationError(f"unknown differencing method {method!r}")
    if step <= 0:
        raise ValidationError("step must be positive")
    x = np.asarray(params, dtype=float)
    family.validate(x)
    es = linalg.eigh(family(x))
    lam = es.eigenvalues
    if lam[0] <= MIN_EIGENVALUE:
        raise SingularStateError(
            f"{family.name}: eigenvalue {lam[0]:.3e} too small for the eigenbasis formula"
        )
    v = es.eigenvectors
    vh = v.conj().T
    # derivative matrices in the eigenbasis
    ders = [vh @ d @ v for d in _derivatives(family, x, step, method == "richardson")]
    denom = 2.0 * (lam[:, None] + lam[None, :])
    n = len(x)
    g = np.empty((n, n))
    for a in range(n):
        for b in range(a, n):
            val = np.sum((ders[a] * ders[b].T).real / denom)
            g[a, b] = g[b, a] = val
    return MetricTensor(family.coords, g)


def _sqrtm_psd(m: np.ndarray) -> np.ndarray:
    es = linalg.eigh(m)
    if es.eigenvalues[0] < -linalg.NEGATIVE_EIG_TOL:
        raise DomainError(f"matrix not positive semidefinite (eigenvalue {es.eigenvalues[0]:.3e})")
    return linalg.matrix_power(m, 0.5)


def fidelity(rho1, rho2) -> float:
    """Root fidelity tr sqrt(sqrt(rho1) rho2 sqrt(rho1))."""
    a = linalg.check_hermitian(rho1)
    b = linalg.check_hermitian(rho2)
    if a.shape != b.shape:
        raise ValidationError(f"dimension mismatch: {a.shape} vs {b.shape}")
    for m in (a, b):
        if abs(linalg.trace(m) - 1.0) > 1e-10:
            raise DomainError("density matrices must have unit trace")
    s = _sqrtm_psd(a)
    _sqrtm_psd(b)
    m = s @ b @ s
    m = 0.5 * (m + m.conj().T)
    ev = np.clip(linalg.eigh(m).eigenvalues, 0.0, None)
    return float(min(np.sum(np.sqrt(ev)), 1.0))


def bures_distance(rho1, rho2) -> float:
    """d_B = sqrt(2 - 2 F), F the root fidelity."""
    return float(np.sqrt(max(2.0 - 2.0 * fidelity(rho1, rho2), 0.0)))
