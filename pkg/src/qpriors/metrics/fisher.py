"""Fisher information of (escort) Husimi distributions.

The escort Husimi density on the c-line is p(c) = (1 + r c)^q / Z. Writing
u = 1 + r c, b = 1 + r, y = log(b/u) in [0, L] with L = 2 atanh(r), y is a
truncated exponential with rate q + 1 and the metric entries become moments:

    g_qq = Var(y)
    g_qr = q / (r b) * Cov(y, e^y)
    g_rr = q^2 / (r b)^2 * Var(e^y)
    T    = q^2 / (2 r^2) * E[(e^y - 1)(1 - e^(y - L))]      (dn^2 coefficient)

:func:`fisher_numeric` works directly in c with adaptive quadrature and
serves as the reference; :func:`husimi_block` evaluates the moments on many
(q, r) pairs at once for use inside outer integrals.
"""

from __future__ import annotations

import numpy as np

from ..errors import DomainError
from ..models import EscortPoint, escort_husimi_log_normalizer
from ..quadrature import integrate_1d
from .closed import husimi_tangential_series
from .tensor import MetricTensor



def fisher_numeric(p: EscortPoint, rel_tol: float = 1e-12) -> MetricTensor:
    """Fisher metric over (q, r, theta1, theta2) by quadrature in c."""
    q, r = p.q, p.r
    if not 0.0 < r < 1.0:
        raise DomainError(f"r={r} must lie in (0, 1)")
    logz = float(escort_husimi_log_normalizer(q, r))
    tol = dict(rel_tol=rel_tol, abs_tol=1e-15)

    def dens(c):
        return np.exp(q * np.log((1 + r * c) / 2) - logz)

    def mean(fn):
        return integrate_1d(lambda c: dens(c) * fn(c), -1.0, 1.0, **tol).require().value

    def score_q(c):
        return np.log((1 + r * c) / 2)

    def score_r(c):
        return q * c / (1 + r * c)

    mq, mr = mean(score_q), mean(score_r)

    def block(c):
        sq = score_q(c) - mq
        sr = score_r(c) - mr
        tang = q * q / 2 * (1 - c * c) / (1 + r * c) ** 2
        return dens(c) * np.stack([sq * sq, sq * sr, sr * sr, tang])

    res = integrate_1d(block, -1.0, 1.0, **tol).require()
    gqq, gqr, grr, tang = res.value
    s1 = np.sin(p.base.theta1)
    g = np.array(
        [
            [gqq, gqr, 0, 0],
            [gqr, grr, 0, 0],
            [0, 0, tang * r * r, 0],
            [0, 0, 0, tang * r * r * s1 * s1],
        ]
    )
    return MetricTensor(("q", "r", "theta1", "theta2"), g)


# -- vectorized moments --------------------------------------------------------

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(24)
# panels in z = (q+1) y, geometric so the e^-z weight is resolved
_PANEL_EDGES = np.concatenate([[0.0, 0.5], 2.0 ** np.arange(0, 16)])


def _panel_rule(zmax: np.ndarray):
    """Nodes/weights on [0, zmax] (per element) from the fixed panel grid."""
    lo = np.minimum(_PANEL_EDGES[:-1], zmax[:, None])
    hi = np.minimum(_PANEL_EDGES[1:], zmax[:, None])
    half = 0.5 * (hi - lo)
    mid = 0.5 * (hi + lo)
    z = mid[..., None] + half[..., None] * _GL_NODES
    w = half[..., None] * _GL_WEIGHTS
    n = z.shape[0]
    return z.reshape(n, -1), w.reshape(n, -1)


def husimi_block(q, r):
    """(g_qq, g_qr, g_rr, T) of the escort-Husimi Fisher metric, vectorized.

    ``T`` is the dn^2 coefficient; the angular entries are T r^2 and
    T r^2 sin^2(theta1).
    """
    q, r = np.broadcast_arrays(np.asarray(q, dtype=float), np.asarray(r, dtype=float))
    shape = q.shape
    q = q.ravel()
    r = r.ravel()
    if np.any((r <= 0) | (r >= 1)):
        raise DomainError("husimi_block needs 0 < r < 1")
    parts = [_block(q[i : i + _CHUNK], r[i : i + _CHUNK]) for i in range(0, q.size, _CHUNK)]
    if not parts:
        return tuple(np.empty(shape) for _ in range(4))
    return tuple(np.concatenate([p[k] for p in parts]).reshape(shape) for k in range(4))


_CHUNK = 4096


def _block(q, r):
    lam = q + 1
    ell = np.log1p(r) - np.log1p(-r)
    z, w = _panel_rule(lam * ell)
    y = z / lam[:, None]
    w = w * np.exp(-z)
    w = w / w.sum(axis=1, keepdims=True)

    def e(v):
        return np.sum(w * v, axis=1)

    ey = np.expm1(y)  # e^y - 1, centered moments are shift invariant
    dy = y - e(y)[:, None]
    de = ey - e(ey)[:, None]
    gqq = e(dy * dy)
    b = 1 + r
    gqr = q / (r * b) * e(dy * de)
    grr = (q / (r * b)) ** 2 * e(de * de)
    tang = q * q / (2 * r * r) * e(ey * -np.expm1(y - ell[:, None]))
    small = q * r < 0.02
    if np.any(small):
        tang = np.where(small, husimi_tangential_series(q, r), tang)
    return gqq, gqr, grr, tang


def husimi_volume_reduced(q, r):
    """Angle-stripped 4D volume element sqrt(det_qr) T r^2 (times sin(theta1) for the full form)."""
    gqq, gqr, grr, tang = husimi_block(q, r)
    det = gqq * grr - gqr * gqr
    return np.sqrt(np.clip(det, 0.0, None)) * tang * np.asarray(r) ** 2
