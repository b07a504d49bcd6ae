from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from ..errors import ValidationError
from .tensor import DEGENERACY_TOL, MetricTensor


@dataclass
class DegeneracyReport:
    n: int
    max_ratio: float
    argmax: tuple
    min_ratio: float
    tol: float = DEGENERACY_TOL
    ratios: np.ndarray = field(default=None, repr=False)

    @property
    def degenerate(self) -> bool:
        return self.max_ratio < self.tol

    def summary(self) -> str:
        verdict = "null" if self.degenerate else "non-null"
        return (
            f"samples={self.n} max|det|/scale={self.max_ratio:.3e} "
            f"min|det|/scale={self.min_ratio:.3e} at-max={self.argmax} -> {verdict}"
        )


def degeneracy_scan(
    metric: Callable[..., MetricTensor],
    sampler: Callable[[np.random.Generator], tuple],
    n: int,
    seed: int = 0,
    tol: float = DEGENERACY_TOL,
) -> DegeneracyReport:
    """Evaluate |det g| / prod(diag g) at ``n`` sampled points.

    ``sampler(rng)`` returns an argument tuple for ``metric``.
    """
    if n < 1:
        raise ValidationError("need at least one sample")
    rng = np.random.default_rng(seed)
    ratios = np.empty(n)
    points = []
    for i in range(n):
        args = sampler(rng)
        points.append(args)
        ratios[i] = metric(*args).det_ratio
    k = int(np.argmax(ratios))
    return DegeneracyReport(n, float(ratios[k]), points[k], float(ratios.min()), tol, ratios)


# -- stock samplers over well-conditioned interiors ----------------------------


def _angles(rng):
    return float(rng.uniform(0.05, math.pi - 0.05)), float(rng.uniform(0.0, 2 * math.pi))


def sample_bloch(rng):
    return (float(rng.uniform(0.02, 0.98)), *_angles(rng))


def sample_escort(rng, q_range=(0.5, 5.0), r_max=0.9):
    q = float(rng.uniform(*q_range))
    return (q, float(rng.uniform(0.02, r_max)), *_angles(rng))


def sample_spin1(rng):
    v = float(rng.uniform(0.05, 0.95))
    return (v, float(rng.uniform(0.02, 0.98) * v), *_angles(rng))


def sample_spin1_escort(rng, q_range=(0.5, 3.0)):
    # keeps every eigenvalue of rho^q / tr well above the Hubner cutoff
    q = float(rng.uniform(*q_range))
    v = float(rng.uniform(0.1, 0.9))
    return (q, v, float(rng.uniform(0.05, 0.9) * v), *_angles(rng))


def sample_aberaj(rng):
    s = float(rng.uniform(0.2, 7.8))
    b = float(rng.uniform(-0.95, 0.95) * s / (2 * math.sqrt(2)))
    return (b, s)
