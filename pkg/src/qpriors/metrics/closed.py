"""Closed-form metric tensors and the monotone-metric f functions.

All tensors use the coordinate order (q,) r, theta1, theta2 and store a
line-element cross term ``A dx dy`` as g_xy = A/2. Angular entries use
dn^2 = r^2 dtheta1^2 + r^2 sin^2(theta1) dtheta2^2.
"""

from __future__ import annotations

import math

import numpy as np

from ..errors import DomainError, SingularStateError
from ..models import AbeRajPoint, BlochPoint, EscortPoint, SpinOneFamilyPoint
from .tensor import MetricTensor

SQRT2 = math.sqrt(2.0)
_SERIES_CUTOFF = 0.3
_SERIES_TERMS = 60


def _interior_r(r: float) -> None:
    if not 0.0 < r < 1.0:
        raise SingularStateError(f"r={r}: closed forms are singular at r=0 and r=1")


def _angular(coef, r, theta1):
    """(g_theta1theta1, g_theta2theta2) for dn^2 coefficient ``coef``."""
    s = math.sin(theta1)
    return coef * r * r, coef * r * r * s * s


# -- Bures -------------------------------------------------------------------


def bures_bloch_closed(p: BlochPoint) -> MetricTensor:
    r = p.r
    _interior_r(r)
    a, b = _angular(0.25, r, p.theta1)
    g = np.diag([0.25 / (1.0 - r * r), a, b])
    return MetricTensor(("r", "theta1", "theta2"), g)


def bures_extended_closed(p: EscortPoint, truncated: bool = False) -> MetricTensor:
    q, r = p.q, p.r
    _interior_r(r)
    logw = math.log1p(-r) - math.log1p(r)
    t = math.exp(q * logw)
    d = (1.0 + t) ** 2
    gqq = t * logw * logw / (4.0 * d)
    gqr = 0.0 if truncated else q * t * logw / (2.0 * (r * r - 1.0) * d)
    grr = q * q * t / ((r * r - 1.0) ** 2 * d)
    a, b = _angular((1.0 - t) ** 2 / (4.0 * r * r * d), r, p.base.theta1)
    g = np.array(
        [[gqq, gqr, 0, 0], [gqr, grr, 0, 0], [0, 0, a, 0], [0, 0, 0, b]], dtype=float
    )
    return MetricTensor(("q", "r", "theta1", "theta2"), g)


def bures_trunc_volume(q, r, theta1=math.pi / 2):
    """sqrt(det) of the truncated extended Bures tensor (broadcasting)."""
    q = np.asarray(q, dtype=float)
    r = np.asarray(r, dtype=float)
    lam = np.log1p(r) - np.log1p(-r)
    t = np.exp(-q * lam)
    return q * t * lam * (1 - t) ** 2 * np.sin(theta1) / (8 * (1 - r * r) * (1 + t) ** 4)


def bures_trunc_antiderivative(q, r):
    """Indefinite q-integral of 4 pi times the angle-stripped truncated volume element.

    Closed expression
        pi (q t (3+t^2) log W - (1+t)(2t + (1+t)^2 log(1+t))) / (6 (r^2-1)(1+t)^3 log W)
    with t = W^q. It diverges like 1/log W as r -> 0; use
    :func:`bures_trunc_q_integral` for differences.
    """
    q = np.asarray(q, dtype=float)
    r = np.asarray(r, dtype=float)
    if np.any((r <= 0) | (r >= 1)):
        raise SingularStateError("antiderivative requires 0 < r < 1")
    if np.any(q <= 0):
        raise DomainError("q must be positive")
    logw = np.log1p(-r) - np.log1p(r)
    t = np.exp(q * logw)
    num = q * t * (3 + t * t) * logw - (1 + t) * (2 * t + (1 + t) ** 2 * np.log1p(t))
    return np.pi * num / (6 * (r * r - 1) * (1 + t) ** 3 * logw)


def _g_trunc(x):
    # antiderivative of x tanh^2(x/2) sech^2(x/2) / 4
    x = np.asarray(x, dtype=float)
    tau = np.tanh(x / 2)
    logcosh = x / 2 + np.log1p(np.exp(-x)) - math.log(2.0)
    big = x * tau**3 / 6 - logcosh / 3 + tau**2 / 6
    x2 = x * x
    small = x2 * x2 * (
        1 / 64 + x2 * (-5 / 1152 + x2 * (77 / 92160 + x2 * (-11 / 80640 + x2 * 7051 / 348364800)))
    )
    return np.where(x < 0.05, small, big)


def bures_trunc_q_integral(q1, q2, r):
    """Antiderivative difference at q2 and q1, evaluated without cancellation.

    With lam = log(1/W) and x = q lam the q-integrand is
    lam x tanh^2(x/2) sech^2(x/2) / 4, so the difference reduces to a single
    antiderivative in x.
    """
    r = np.asarray(r, dtype=float)
    lam = np.log1p(r) - np.log1p(-r)
    with np.errstate(invalid="ignore", divide="ignore"):
        out = np.pi * (_g_trunc(q2 * lam) - _g_trunc(q1 * lam)) / (2 * (1 - r * r) * lam)
    return out


# -- Husimi / Fisher ---------------------------------------------------------


def _atanh_series(r):
    """s = atanh(r)/r - 1, P = 1 - (1-r^2)(1+s), and 2s - P (vectorized)."""
    r = np.atleast_1d(np.asarray(r, dtype=float))
    with np.errstate(divide="ignore", invalid="ignore"):
        s = np.arctanh(r) / r - 1.0
    p = 1.0 - (1.0 - r * r) * (1.0 + s)
    d = 2 * s - p
    use = r < _SERIES_CUTOFF
    if np.any(use):
        k = np.arange(1, _SERIES_TERMS + 1)
        r2k = r[use][..., None] ** (2 * k)
        s[use] = np.sum(r2k / (2 * k + 1), axis=-1)
        p[use] = np.sum(2 * r2k / (4 * k * k - 1), axis=-1)
        d[use] = np.sum(4 * (k - 1) * r2k / (4 * k * k - 1), axis=-1)
    return s, p, d


def husimi_q1_components(r) -> dict:
    """q=1 Husimi Fisher entries: g_qq, g_qr, g_rr, dn^2 coefficient and det of the (q,r) block."""
    r = np.asarray(r, dtype=float)
    if np.any((r <= 0) | (r >= 1)):
        raise SingularStateError("closed Husimi forms are singular at r=0 and r=1")
    s, p, d = (v.reshape(r.shape) for v in _atanh_series(r))
    r2 = r * r
    out = {
        "gqq": p * (2 - p) / 4,
        "gqr": p / (2 * r),
        "grr": s / r2,
        "tangential": p / (2 * r2),
        "det_qr": p / (4 * r2) * (d - p * s),
    }
    if r.ndim == 0:
        out = {k: float(v) for k, v in out.items()}
    return out


def fisher_husimi_closed(p: BlochPoint) -> MetricTensor:
    c = husimi_q1_components(p.r)
    a, b = _angular(c["tangential"], p.r, p.theta1)
    return MetricTensor(("r", "theta1", "theta2"), np.diag([c["grr"], a, b]))


def fisher_husimi_extended_q1_closed(p: BlochPoint) -> MetricTensor:
    c = husimi_q1_components(p.r)
    a, b = _angular(c["tangential"], p.r, p.theta1)
    g = np.array(
        [
            [c["gqq"], c["gqr"], 0, 0],
            [c["gqr"], c["grr"], 0, 0],
            [0, 0, a, 0],
            [0, 0, 0, b],
        ]
    )
    return MetricTensor(("q", "r", "theta1", "theta2"), g)


def printed_extended_husimi_q1(r: float) -> dict:
    """The q=1 (q, r) entries in line-element form (the cross value is the dq dr coefficient)."""
    logw = math.log((1 - r) / (1 + r))
    return {
        "dq2": 0.25 - (r * r - 1) ** 2 * logw**2 / (16 * r * r),
        "dqdr": (2 * r - (r * r - 1) * logw) / (2 * r * r),
        "dr2": (-2 * r - logw) / (2 * r**3),
    }


# -- f functions ---------------------------------------------------------------

F_IDS = ("f_B", "f_Bures_q", "f_F", "f_F_q")


def _check_t(t):
    t = np.asarray(t, dtype=float)
    if np.any(t <= 0) or np.any(t > 1):
        raise DomainError("f functions take t in (0, 1]")
    return t


def f_b(t):
    return (1 + _check_t(t)) / 2


def f_bures_q(t, q):
    t = _check_t(t)
    tq = t**q
    with np.errstate(divide="ignore"):
        return 2 * (1 + t) * (1 + tq) ** 2 / (tq - 1) ** 2


def f_f(t):
    """(t-1)^3 / (t^2 - 2 t log t - 1), with the limit 3 at t = 1."""
    t = _check_t(t)
    return f_f_q(t, 1.0)


def f_f_q(t, q):
    """Tangential function of the escort-Husimi Fisher metric.

    Rewritten with eps = q - 1 and phi = expm1(eps log t)/eps so that q = 1
    is a regular point; near t = 1 a series in u = 1 - t is used.
    """
    t = _check_t(t)
    q = float(q)
    eps = q - 1.0
    ell = np.log(t)
    phi = ell if eps == 0 else np.expm1(eps * ell) / eps
    num = (t - 1) ** 2 * np.expm1((q + 1) * ell)
    den = q * (1 + t) * ((t * t - 1) - phi * (2 * t + eps * t * (1 - t)))
    with np.errstate(invalid="ignore", divide="ignore"):
        out = num / den
    # small-r branch: r = (1-t)/(1+t), valid while q r is small
    r = (1 - t) / (1 + t)
    near = q * r < 0.02
    if np.any(near):
        out = np.where(near, 1.0 / ((1 + r) * husimi_tangential_series(q, r)), out)
    return out[()] if np.ndim(out) == 0 else out


def husimi_tangential_series(q, r):
    """dn^2 coefficient of the escort-Husimi Fisher metric, series in r to O(r^6)."""
    q = np.asarray(q, dtype=float)
    x = np.asarray(r, dtype=float) ** 2
    c0 = 1 / 3
    c1 = -(q * q + 5 * q - 9) / 45
    c2 = (2 * q**4 + 14 * q**3 + 2 * q * q - 126 * q + 135) / 945
    c3 = -(3 * q**6 + 27 * q**5 + 31 * q**4 - 281 * q**3 - 347 * q * q + 1917 * q - 1575) / 14175
    return q * q * (c0 + x * (c1 + x * (c2 + x * c3)))


def f_eval(fid: str, t, q: float | None = None):
    if fid == "f_B":
        return f_b(t)
    if fid == "f_F":
        return f_f(t)
    if q is None:
        raise DomainError(f"{fid} needs a q value")
    if fid == "f_Bures_q":
        return f_bures_q(t, q)
    if fid == "f_F_q":
        return f_f_q(t, q)
    raise DomainError(f"unknown f function {fid!r}; expected one of {F_IDS}")


# -- spin-1 family -------------------------------------------------------------


def spin1_bures_closed(p: SpinOneFamilyPoint) -> MetricTensor:
    v, r = p.v, p.r
    if not 0.0 < r < v < 1.0:
        raise SingularStateError(f"need 0 < r < v < 1, got r={r}, v={v}")
    d = v * v - r * r
    gvv = (v - r * r) / (4 * (1 - v) * d)
    gvr = -r / (4 * d)  # the line-element dv dr coefficient, inside the 1/4, is this entry
    grr = v / (4 * d)
    a, b = _angular(1 / (4 * v), r, p.theta1)
    g = np.array(
        [[gvv, gvr, 0, 0], [gvr, grr, 0, 0], [0, 0, a, 0], [0, 0, 0, b]], dtype=float
    )
    return MetricTensor(("v", "r", "theta1", "theta2"), g)


def spin1_qext_tangential(p: SpinOneFamilyPoint, q: float) -> float:
    """dn^2 coefficient of the q-extended spin-1 Bures metric."""
    v, r = p.v, p.r
    if not 0.0 < r < v < 1.0:
        raise SingularStateError(f"need 0 < r < v < 1, got r={r}, v={v}")
    lo, hi, mid = (v - r) ** q, (v + r) ** q, (2 - 2 * v) ** q
    return (lo - hi) ** 2 / (4 * r * r * (lo + hi) * (mid + lo + hi))


# -- Abe-Rajagopal, q = 1 --------------------------------------------------------


def _aberaj_logs(b, s):
    args = (s - 2 * SQRT2 * b, s + 2 * SQRT2 * b, 8 - s)
    if min(args) <= 0:
        raise DomainError(f"(b_q={b}, sigma_q2={s}): logarithm argument not positive")
    return tuple(math.log(x) for x in args)


def aberaj_c(b: float, s: float) -> float:
    a, bb, c = _aberaj_logs(b, s)
    return (
        -4 * c * c * s * (s - 8)
        + 2 * a * bb * (8 * b * b - s * s)
        - a * a * (8 * b * b + s * (s - 16) - 4 * SQRT2 * b * (s - 8))
        - bb * bb * (8 * b * b + s * (s - 16) + 4 * SQRT2 * b * (s - 8))
        + 4 * c * (s - 8) * (a * (s - 2 * SQRT2 * b) + bb * (s + 2 * SQRT2 * b))
    )


def aberaj_metric_q1(p: AbeRajPoint) -> MetricTensor:
    b, s = p.b_q, p.sigma_q2
    a, bb, c = _aberaj_logs(b, s)
    g = np.zeros((3, 3))
    g[0, 0] = aberaj_c(b, s) / 1024
    g[0, 1] = g[1, 0] = 0.5 * (a - bb) / (8 * SQRT2)
    g[0, 2] = g[2, 0] = 0.5 * (2 * c - a - bb) / 32
    g[1, 1] = s / (4 * s * s - 32 * b * b)
    g[1, 2] = g[2, 1] = 0.5 * b / (16 * b * b - 2 * s * s)
    g[2, 2] = (b * b - s) / (4 * (s - 8) * (s * s - 8 * b * b))
    return MetricTensor(("q", "b_q", "sigma_q2"), g)


def aberaj_volume_candidates(p: AbeRajPoint) -> dict:
    """The two readings of the printed (b_q, sigma_q2) volume element, squared."""
    b, s = p.b_q, p.sigma_q2
    return {
        "sigma_q2": -1 / (16 * (s - 8) * (s * s - 8 * b * b)),
        "sigma_q": -1 / (16 * (math.sqrt(s) - 8) * (s * s - 8 * b * b)),
    }
