"""Parameterized density-matrix and Husimi-distribution families.

Coordinates follow the Bloch-ball convention

    x = r cos(theta1),  y = r sin(theta1) cos(theta2),  z = r sin(theta1) sin(theta2)

with rho = (I + x sx + y sy + z sz) / 2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import linalg
from .errors import DomainError, SingularStateError

#: Lower bound on the escort parameter. Module-level so it can be relaxed.
Q_FLOOR = 0.5


def cartesian(r, theta1, theta2):
    """Bloch-vector components for spherical coordinates (broadcasting)."""
    s1 = np.sin(theta1)
    return r * np.cos(theta1), r * s1 * np.cos(theta2), r * s1 * np.sin(theta2)


def direction(theta1, theta2):
    """Unit vector (cosines) for the angles; the Bloch vector is ``r * direction``."""
    return cartesian(1.0, theta1, theta2)


def w_ratio(r):
    """Eigenvalue ratio W = (1 - r) / (1 + r)."""
    return (1.0 - r) / (1.0 + r)


@dataclass(frozen=True)
class BlochPoint:
    r: float
    theta1: float
    theta2: float

    def __post_init__(self):
        if not 0.0 <= self.r <= 1.0:
            raise DomainError(f"r={self.r} outside [0, 1]")
        if not 0.0 <= self.theta1 <= math.pi:
            raise DomainError(f"theta1={self.theta1} outside [0, pi]")
        if not 0.0 <= self.theta2 < 2 * math.pi:
            raise DomainError(f"theta2={self.theta2} outside [0, 2pi)")

    @property
    def xyz(self) -> tuple[float, float, float]:
        return tuple(float(c) for c in cartesian(self.r, self.theta1, self.theta2))

    @property
    def w(self) -> float:
        if self.r == 1.0:
            raise SingularStateError("W = 0 for a pure state; log W undefined")
        return w_ratio(self.r)


@dataclass(frozen=True)
class EscortPoint:
    base: BlochPoint
    q: float

    def __post_init__(self):
        if not self.q >= Q_FLOOR:
            raise DomainError(f"q={self.q} below the escort floor {Q_FLOOR}")

    @classmethod
    def of(cls, q, r, theta1=0.0, theta2=0.0) -> "EscortPoint":
        return cls(BlochPoint(r, theta1, theta2), q)

    @property
    def r(self) -> float:
        return self.base.r


@dataclass(frozen=True)
class SpinOneFamilyPoint:
    v: float
    r: float
    theta1: float
    theta2: float

    def __post_init__(self):
        if not 0.0 <= self.v <= 1.0:
            raise DomainError(f"v={self.v} outside [0, 1]")
        if not 0.0 <= self.r <= self.v:
            raise DomainError(f"need 0 <= r <= v, got r={self.r}, v={self.v}")
        if not 0.0 <= self.theta1 <= math.pi or not 0.0 <= self.theta2 < 2 * math.pi:
            raise DomainError("angles out of range")


@dataclass(frozen=True)
class AbeRajPoint:
    b_q: float
    sigma_q2: float

    def __post_init__(self):
        b, s = self.b_q, self.sigma_q2
        if not (s < 8.0 and s * s > 8.0 * b * b and s > 2.0 * math.sqrt(2.0) * abs(b)):
            raise DomainError(
                f"(b_q={b}, sigma_q2={s}) outside the metric domain "
                "sigma_q2 < 8, sigma_q2 > 2 sqrt(2) |b_q|"
            )


# -- matrices ---------------------------------------------------------------


def bloch_matrix(r, theta1, theta2) -> np.ndarray:
    x, y, z = cartesian(r, theta1, theta2)
    return 0.5 * np.array([[1 + z, x - 1j * y], [x + 1j * y, 1 - z]], dtype=complex)


def bloch_rho(p: BlochPoint) -> np.ndarray:
    return bloch_matrix(p.r, p.theta1, p.theta2)


def escort_matrix(q, r, theta1, theta2) -> np.ndarray:
    if r >= 1.0 and q < 1.0:
        raise SingularStateError("escort state at r=1 is singular for q < 1")
    if r < 0 or r > 1:
        raise DomainError(f"r={r} outside [0, 1]")
    num = linalg.matrix_power(2.0 * bloch_matrix(r, theta1, theta2), q)
    return num / ((1.0 - r) ** q + (1.0 + r) ** q)


def escort_rho(p: EscortPoint) -> np.ndarray:
    """Unit-trace escort state (2 rho)^q / ((1-r)^q + (1+r)^q)."""
    b = p.base
    return escort_matrix(p.q, b.r, b.theta1, b.theta2)


def spin1_matrix(v, r, theta1, theta2) -> np.ndarray:
    if not 0.0 <= r <= v <= 1.0:
        raise DomainError(f"need 0 <= r <= v <= 1, got r={r}, v={v}")
    x, y, z = cartesian(r, theta1, theta2)
    return 0.5 * np.array(
        [[v + z, 0, x - 1j * y], [0, 2 - 2 * v, 0], [x + 1j * y, 0, v - z]], dtype=complex
    )


def spin1_rho(p: SpinOneFamilyPoint) -> np.ndarray:
    return spin1_matrix(p.v, p.r, p.theta1, p.theta2)


def spin1_escort_matrix(q, v, r, theta1, theta2) -> np.ndarray:
    m = linalg.matrix_power(spin1_matrix(v, r, theta1, theta2), q)
    return m / linalg.trace(m)


# -- Husimi distributions ---------------------------------------------------
#
# Kernel H = tr(rho (I + u.sigma)/2) = (1 + r c)/2 with c = cos(angle between u
# and the Bloch vector), integrated against dOmega / (2 pi). After the azimuthal
# integral that measure is dc on [-1, 1].


def husimi_value(p: BlochPoint, c):
    c = np.asarray(c, dtype=float)
    if np.any(np.abs(c) > 1.0):
        raise DomainError("cosine outside [-1, 1]")
    return 0.5 * (1.0 + p.r * c)


def escort_husimi_log_normalizer(q, r):
    """log of Z(q, r) = integral over c in [-1, 1] of ((1 + r c)/2)^q."""
    q = np.asarray(q, dtype=float)
    r = np.asarray(r, dtype=float)
    a = q + 1.0
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio_term = -np.expm1(-2.0 * a * np.arctanh(r))
        big = a * np.log1p(r) + np.log(ratio_term) - np.log(r * a)
    # r -> 0: Z -> 2 (the 2^-q factor is added below)
    small = np.log(2.0) + np.zeros_like(big)
    logz = np.where(r > 1e-8, big, small)
    return logz - q * np.log(2.0)


def escort_husimi_value(p: EscortPoint, c):
    """Self-normalized escort Husimi density H^q / Z(q, r) on the c-line."""
    h = husimi_value(p.base, c)
    logz = escort_husimi_log_normalizer(p.q, p.r)
    with np.errstate(divide="ignore"):
        return np.exp(p.q * np.log(h) - logz)


def printed_escort_prefactor_ratio(q, r) -> float:
    """Ratio of the closed escort-Husimi prefactor 2 r (1+q) / ((1+r)^(1+q) - (1-r)^(1+q))
    to the self-normalizing constant 1/Z used here. Equals 2^(1-q)."""
    printed = 2 * r * (1 + q) / ((1 + r) ** (1 + q) - (1 - r) ** (1 + q))
    return float(printed * np.exp(escort_husimi_log_normalizer(q, r)))


# -- families for the numeric Bures engine ----------------------------------


@dataclass(frozen=True)
class DensityFamily:
    """A smooth map from coordinates to density matrices."""

    name: str
    coords: tuple[str, ...]
    matrix: Callable[..., np.ndarray]
    check: Callable[..., None] | None = None

    def __call__(self, params) -> np.ndarray:
        return self.matrix(*params)

    def validate(self, params) -> None:
        if len(params) != len(self.coords):
            raise DomainError(f"{self.name} expects {len(self.coords)} coordinates {self.coords}")
        if self.check is not None:
            self.check(*params)


def _check_bloch(r, theta1, theta2):
    if not 0.0 < r < 1.0:
        raise DomainError(f"r={r} must lie in (0, 1)")


def _check_escort(q, r, theta1, theta2):
    if q < Q_FLOOR:
        raise DomainError(f"q={q} below {Q_FLOOR}")
    _check_bloch(r, theta1, theta2)


def _check_spin1(v, r, theta1, theta2):
    if not 0.0 < r < v < 1.0:
        raise DomainError(f"need 0 < r < v < 1, got r={r}, v={v}")


def _check_spin1_escort(q, v, r, theta1, theta2):
    if q <= 0:
        raise DomainError(f"q={q} must be positive")
    _check_spin1(v, r, theta1, theta2)


BLOCH = DensityFamily("bloch", ("r", "theta1", "theta2"), bloch_matrix, _check_bloch)
ESCORT = DensityFamily("escort", ("q", "r", "theta1", "theta2"), escort_matrix, _check_escort)
SPIN1 = DensityFamily("spin1", ("v", "r", "theta1", "theta2"), spin1_matrix, _check_spin1)
SPIN1_ESCORT = DensityFamily(
    "spin1_escort", ("q", "v", "r", "theta1", "theta2"), spin1_escort_matrix, _check_spin1_escort
)
