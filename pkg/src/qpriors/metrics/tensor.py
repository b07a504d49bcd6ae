from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import ValidationError

#: |det g| below this fraction of the diagonal product counts as null
DEGENERACY_TOL = 1e-10

COORDINATES = ("q", "v", "r", "theta1", "theta2", "b_q", "sigma_q2")


@dataclass(frozen=True)
class MetricTensor:
    """Metric coefficients at a point.

    ``g`` is the symmetric coefficient matrix of ds^2 = sum_ij g_ij dx_i dx_j,
    so a line-element cross term ``A dx dy`` is stored as g_xy = g_yx = A/2.
    """

    coords: tuple[str, ...]
    g: np.ndarray

    def __post_init__(self):
        g = np.array(self.g, dtype=float)
        n = len(self.coords)
        if g.shape != (n, n):
            raise ValidationError(f"metric shape {g.shape} does not match coords {self.coords}")
        unknown = set(self.coords) - set(COORDINATES)
        if unknown:
            raise ValidationError(f"unknown coordinate labels {sorted(unknown)}")
        asym = np.abs(g - g.T).max()
        if asym > 1e-12 * max(1.0, np.abs(g).max()):
            raise ValidationError(f"metric not symmetric (max asymmetry {asym:.3e})")
        g = 0.5 * (g + g.T)
        g.setflags(write=False)
        object.__setattr__(self, "g", g)

    def __getitem__(self, key) -> float:
        a, b = key
        return float(self.g[self.coords.index(a), self.coords.index(b)])

    @property
    def det(self) -> float:
        return float(np.linalg.det(self.g))

    @property
    def scale(self) -> float:
        """Magnitude of the product of diagonal entries."""
        return float(abs(np.prod(np.diag(self.g))))

    @property
    def det_ratio(self) -> float:
        s = self.scale
        d = abs(self.det)
        if s > 0:
            return d / s
        # diagonal underflow: a zero determinant is still null
        return 0.0 if d == 0 else float("inf")

    @property
    def volume_element(self) -> float:
        return float(np.sqrt(max(self.det, 0.0)))

    def is_degenerate(self, tol: float = DEGENERACY_TOL) -> bool:
        return self.det_ratio < tol

    def line_element(self, dx) -> float:
        dx = np.asarray(dx, dtype=float)
        return float(dx @ self.g @ dx)

    def sub(self, coords) -> "MetricTensor":
        idx = [self.coords.index(c) for c in coords]
        return MetricTensor(tuple(coords), self.g[np.ix_(idx, idx)])

    def relative_deviation(self, other: "MetricTensor") -> float:
        """Frobenius norm of the difference relative to the norm of ``other``."""
        if tuple(other.coords) != tuple(self.coords):
            raise ValidationError("coordinate labels differ")
        return float(np.linalg.norm(self.g - other.g) / np.linalg.norm(other.g))


def volume_element(g: MetricTensor) -> tuple[float, bool]:
    """sqrt(max(det g, 0)) together with the degeneracy flag."""
    return g.volume_element, g.is_degenerate()
