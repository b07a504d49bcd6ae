"""Spin-measurement likelihoods, posteriors and information gains."""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import IntegrationError, ValidationError
from .models import cartesian, direction
from .priors import PriorDensity
from .quadrature import IntegrationSpec, integrate

AXES = ("x", "y", "z")
CATALAN = 0.915965594177

_TOKEN = re.compile(r"^(x|y|z):(\d+),(\d+)$|^pow:([0-9.eE+-]+(?:/[0-9.eE+-]+)?)$")


@dataclass(frozen=True)
class MeasurementSpec:
    """Up/down counts per axis and an exponent applied to the whole likelihood."""

    counts: tuple[tuple[int, int], tuple[int, int], tuple[int, int]] = ((0, 0), (0, 0), (0, 0))
    power: float = 1.0

    def __post_init__(self):
        if len(self.counts) != 3 or any(len(c) != 2 for c in self.counts):
            raise ValidationError("counts must be three (up, down) pairs")
        if any(int(n) != n or n < 0 for c in self.counts for n in c):
            raise ValidationError("counts must be non-negative integers")
        if not self.power > 0:
            raise ValidationError(f"power must be positive, got {self.power}")

    @classmethod
    def parse(cls, text: str) -> "MeasurementSpec":
        """Parse ``"x:u,d y:u,d z:u,d pow:P"``; omitted axes have no counts."""
        counts = {a: (0, 0) for a in AXES}
        power = 1.0
        for tok in text.split():
            m = _TOKEN.match(tok)
            if not m:
                raise ValidationError(f"bad measurement token {tok!r}")
            if m.group(1):
                counts[m.group(1)] = (int(m.group(2)), int(m.group(3)))
            else:
                num, _, den = m.group(4).partition("/")
                power = float(num) / float(den) if den else float(num)
        return cls(tuple(counts[a] for a in AXES), power)

    @classmethod
    def canonical(cls, power: float = 1.0) -> "MeasurementSpec":
        """One up and one down outcome along each axis."""
        return cls(((1, 1), (1, 1), (1, 1)), power)

    def with_power(self, power: float) -> "MeasurementSpec":
        return MeasurementSpec(self.counts, power)

    @property
    def is_constant(self) -> bool:
        return all(u == 0 and d == 0 for u, d in self.counts)

    def text(self) -> str:
        parts = [f"{a}:{u},{d}" for a, (u, d) in zip(AXES, self.counts) if u or d]
        return " ".join(parts + [f"pow:{self.power:g}"])


@dataclass(frozen=True)
class LikelihoodField:
    """Likelihood as a function of prior coordinates (rows of ``x``)."""

    spec: MeasurementSpec
    coords: tuple[str, ...]
    fn: Callable[[np.ndarray], np.ndarray] = field(repr=False)

    def __call__(self, x) -> np.ndarray:
        return self.fn(np.asarray(x, dtype=float))


def _product(spec: MeasurementSpec, comps) -> np.ndarray:
    out = np.ones_like(np.asarray(comps[0], dtype=float))
    for (up, down), a in zip(spec.counts, comps):
        if up:
            out = out * ((1 + a) / 2) ** up
        if down:
            out = out * ((1 - a) / 2) ** down
    if spec.power != 1.0:
        out = out**spec.power
    return out


def likelihood(spec: MeasurementSpec) -> LikelihoodField:
    """Standard Bloch-ball likelihood over (r, theta1, theta2)."""

    def fn(x):
        return _product(spec, cartesian(x[0], x[1], x[2]))

    return LikelihoodField(spec, ("r", "theta1", "theta2"), fn)


def escort_a(q, r):
    """a(q, r) = (1 - W^q) / (r (1 + W^q)) = tanh(q atanh r) / r, with a(q, 0) = q."""
    q = np.asarray(q, dtype=float)
    r = np.asarray(r, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        a = np.tanh(q * np.arctanh(r)) / r
    # tanh(q u)/r with u = atanh r: q + q (1 - q^2) r^2 / 3 + O(r^4)
    small = q * q * r * r < 1e-10
    return np.where(small, q * (1 + (1 - q * q) * r * r / 3), a)


def escort_radius(q, r):
    """Effective Bloch radius r a(q, r) = tanh(q atanh r) of the escort state."""
    with np.errstate(divide="ignore"):
        return np.tanh(np.asarray(q, dtype=float) * np.arctanh(np.asarray(r, dtype=float)))


def likelihood_q(spec: MeasurementSpec) -> LikelihoodField:
    """Escort likelihood over (q, r, theta1, theta2): each axis uses a(q,r) w."""

    def fn(x):
        s = escort_radius(x[0], x[1])
        n = direction(x[2], x[3])
        return _product(spec, tuple(s * c for c in n))

    return LikelihoodField(spec, ("q", "r", "theta1", "theta2"), fn)


# -- posterior and information gain ----------------------------------------------


@dataclass(frozen=True)
class Posterior:
    prior: PriorDensity
    like: LikelihoodField
    evidence: float
    evidence_error: float
    evals: int

    @property
    def name(self) -> str:
        return f"post[{self.prior.name}|{self.like.spec.text()}]"

    @property
    def coords(self):
        return self.prior.coords

    @property
    def domain(self):
        return self.prior.domain

    def __call__(self, x) -> np.ndarray:
        return self.prior(x) * self.like(x) / self.evidence

    def spec(self, **kw) -> IntegrationSpec:
        return self.prior.spec(**kw)


def _check_compatible(prior: PriorDensity, like: LikelihoodField):
    if tuple(prior.coords) != tuple(like.coords):
        raise ValidationError(
            f"likelihood over {like.coords} does not match prior {prior.name} over {prior.coords}"
        )


def _tol(prior, rel_tol):
    if rel_tol is not None:
        return rel_tol
    return 1e-8 if len(prior.coords) <= 3 else 1e-5


def posterior(prior: PriorDensity, like: LikelihoodField, rel_tol=None) -> Posterior:
    _check_compatible(prior, like)
    if like.spec.is_constant:
        return Posterior(prior, like, 1.0, 0.0, 0)
    res = integrate(lambda x: prior(x) * like(x), prior.spec(rel_tol=_tol(prior, rel_tol), abs_tol=1e-15))
    if not res.converged:
        raise IntegrationError(f"evidence for {prior.name}: {res.message}", res)
    if not res.value > 0:
        raise ValidationError(f"zero evidence for {prior.name} under {like.spec.text()}")
    return Posterior(prior, like, res.value, res.error_estimate, res.evals)


@dataclass(frozen=True)
class GainResult:
    value: float
    evidence: float
    error_estimate: float
    evals: int


def _xlogx(v):
    return np.where(v > 0, v * np.log(np.where(v > 0, v, 1.0)), 0.0)


def _gain(prior, like, spec) -> GainResult:
    if like.spec.is_constant:
        return GainResult(0.0, 1.0, 0.0, 0)

    def f(x):
        p = prior(x)
        lk = like(x)
        return np.stack([p * lk, p * _xlogx(lk)])

    res = integrate(f, spec)
    if not res.converged:
        raise IntegrationError(f"information gain for {prior.name}: {res.message}", res)
    z, b = res.value
    ez, eb = res.error_estimate
    value = b / z - math.log(z)
    err = abs(eb / z) + abs(ez) * (abs(b) / z**2 + 1 / z)
    return GainResult(max(value, 0.0) if value > -1e-12 else value, z, err, res.evals)


def info_gain(prior: PriorDensity, like: LikelihoodField, rel_tol=None) -> GainResult:
    """KL(posterior || prior) = E_post[log L] - log Z, in nats."""
    _check_compatible(prior, like)
    return _gain(prior, like, prior.spec(rel_tol=_tol(prior, rel_tol), abs_tol=1e-15))


def info_gain_qext(prior4d: PriorDensity, spec: MeasurementSpec, rel_tol=None, max_evals=None) -> GainResult:
    """Information gain for a prior over (q, r, theta1, theta2) under the escort likelihood."""
    like = likelihood_q(spec)
    _check_compatible(prior4d, like)
    ispec = prior4d.spec(rel_tol=_tol(prior4d, rel_tol), abs_tol=1e-15)
    if max_evals is not None:
        ispec = IntegrationSpec(
            ispec.domain, ispec.rel_tol, ispec.abs_tol, int(max_evals), ispec.transforms
        )
    return _gain(prior4d, like, ispec)


def single_up_gain_closed(hyp3f2: float) -> float:
    """(8 3F2({1/2,1,2},{3/2,5/2};1) - pi (log 64 - 5) - 6 - 12 K) / (6 pi)."""
    return (8 * hyp3f2 - math.pi * (math.log(64) - 5) - 6 - 12 * CATALAN) / (6 * math.pi)


CLOSED_GAINS = {
    "pair": 7 / 6 - math.log(3),
    "two_up": 59 / 30 - math.log(5),
}
