"""Normalized volume-element priors over the Bloch ball (optionally times q).

Every prior here is rotationally invariant: its density is a function of the
non-angular coordinates times sin(theta1). ``PriorDensity.reduced`` holds that
function already integrated over the angles (a factor 4 pi), which keeps
marginals and relative entropies one- or two-dimensional.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from ._io import atomic_write, csv_text
from .config import Config
from .errors import IntegrationError, ValidationError
from .metrics.closed import bures_trunc_volume, husimi_q1_components
from .metrics.fisher import husimi_volume_reduced
from .quadrature import IntegrationSpec, integrate, integrate_1d

PI = math.pi
FOUR_PI = 4 * PI
ANGLES = ("theta1", "theta2")
ANGLE_DOMAIN = ((0.0, PI), (0.0, 2 * PI))

#: reference normalization constants of the two Husimi priors
REFERENCE_NORMALIZATION = {"p_F": 1.39350989, "p_Fq1": 0.24559293}
#: raw mass of the truncated q=1 Bures volume element over the ball
BTRUNC_MASS = PI * (1 + math.log(4)) / 24

PRIOR_NAMES = ("p_B", "p_Btrunc", "p_F", "p_Fq1", "p_Bqext4D", "p_Fqext4D")

_TRANSFORM = {"r": "sqrt_boundary_upper", "q": "log_scale", "theta1": "none", "theta2": "none"}


@dataclass(frozen=True)
class PriorDensity:
    """A named probability density over a coordinate box.

    ``raw(x)`` is the unnormalized volume element (x has shape (d, n)) and
    ``reduced(y)`` the angle-integrated normalized density over the
    non-angular coordinates.
    """

    name: str
    coords: tuple[str, ...]
    domain: tuple[tuple[float, float], ...]
    raw: Callable[[np.ndarray], np.ndarray]
    normalization: float
    reduced: Callable[[np.ndarray], np.ndarray]
    reference: float | None = None
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if len(self.coords) != len(self.domain):
            raise ValidationError("coords and domain lengths differ")
        if not (np.isfinite(self.normalization) and self.normalization > 0):
            raise ValidationError(f"{self.name}: normalization {self.normalization} not finite/positive")

    def __call__(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        r = x[self.coords.index("r")]
        inside = (r > 0) & (r < self.r_max)
        if np.all(inside):
            return self.raw(x) / self.normalization
        # boundary points carry no mass; the closed forms may be singular there
        out = np.zeros(r.shape)
        out[inside] = self.raw(x[:, inside]) / self.normalization
        return out

    def reduced_safe(self, y) -> np.ndarray:
        """``reduced`` with zeros at the radial endpoints."""
        y = np.asarray(y, dtype=float)
        r = y[self.core_coords.index("r")]
        inside = (r > 0) & (r < self.r_max)
        out = np.zeros(r.shape)
        if np.any(inside):
            out[inside] = self.reduced(y[:, inside])
        return out

    @property
    def core_coords(self) -> tuple[str, ...]:
        return tuple(c for c in self.coords if c not in ANGLES)

    @property
    def core_domain(self) -> tuple[tuple[float, float], ...]:
        return tuple(d for c, d in zip(self.coords, self.domain) if c not in ANGLES)

    @property
    def radial_only(self) -> bool:
        return self.core_coords == ("r",)

    @property
    def r_max(self) -> float:
        return self.domain[self.coords.index("r")][1]

    def spec(self, rel_tol=1e-8, abs_tol=1e-13, core=False, max_evals=100_000_000) -> IntegrationSpec:
        names = self.core_coords if core else self.coords
        dom = self.core_domain if core else self.domain
        tr = tuple(_TRANSFORM[c] for c in names)
        return IntegrationSpec(dom, rel_tol=rel_tol, abs_tol=abs_tol, transforms=tr, max_evals=max_evals)

    def radial(self, r) -> np.ndarray:
        """Normalized r-marginal for a prior over the ball alone."""
        if not self.radial_only:
            raise ValidationError(f"{self.name} has coordinates {self.core_coords}; use marginal()")
        return self.reduced_safe(np.asarray(r, dtype=float)[None, :])

    def mass(self, rel_tol=1e-8, full=True):
        """Total probability by quadrature, over all coordinates when ``full``."""
        if full:
            return integrate(self, self.spec(rel_tol=rel_tol))
        return integrate(self.reduced_safe, self.spec(rel_tol=rel_tol, core=True))


# -- raw volume elements ---------------------------------------------------------


def _split(x):
    return x[0], x[1], x[2]


def _raw_bures_sqrt(x):
    r, t1, _ = _split(x)
    return r * r * np.sin(t1) / (8 * np.sqrt(1 - r * r))


def _raw_bures_printed(x):
    r, t1, _ = _split(x)
    return r * r * np.sin(t1) / (8 * (1 - r * r))


def _lam(r):
    return np.log1p(r) - np.log1p(-r)


def _raw_btrunc(x):
    r, t1, _ = _split(x)
    return r * r * _lam(r) * np.sin(t1) / 32


def _raw_fisher_core(r):
    c = husimi_q1_components(r)
    return np.sqrt(c["grr"]) * c["tangential"] * r * r


def _raw_fisher_q1_core(r):
    c = husimi_q1_components(r)
    return np.sqrt(np.clip(c["det_qr"], 0, None)) * c["tangential"] * r * r


def _safe_core(fn):
    # closed Husimi forms are singular at the endpoints; the densities vanish there
    def wrapped(r):
        r = np.asarray(r, dtype=float)
        out = np.zeros_like(r)
        ok = (r > 0) & (r < 1)
        if np.any(ok):
            out[ok] = fn(r[ok])
        return out

    return wrapped


_fisher_core = _safe_core(_raw_fisher_core)
_fisher_q1_core = _safe_core(_raw_fisher_q1_core)


def _raw_4d_bures(x):
    q, r, t1 = x[0], x[1], x[2]
    return bures_trunc_volume(q, r, t1)


def _husimi_4d_core(q, r):
    q, r = np.broadcast_arrays(np.asarray(q, float), np.asarray(r, float))
    out = np.zeros(q.shape)
    ok = (r > 0) & (r < 1)
    if np.any(ok):
        out[ok] = husimi_volume_reduced(q[ok], r[ok])
    return out


def _raw_4d_fisher(x):
    return _husimi_4d_core(x[0], x[1]) * np.sin(x[2])


# -- construction --------------------------------------------------------------------


def _ball(r_max=1.0):
    return ((0.0, r_max),) + ANGLE_DOMAIN


@functools.lru_cache(maxsize=None)
def _core_norm(kind: str, rel_tol: float, q_min: float = 0.0, q_max: float = 0.0) -> float:
    if kind == "p_F":
        res = integrate_1d(_fisher_core, 0.0, 1.0, transform="sqrt_boundary_upper", rel_tol=rel_tol)
    elif kind == "p_Fq1":
        res = integrate_1d(_fisher_q1_core, 0.0, 1.0, transform="sqrt_boundary_upper", rel_tol=rel_tol)
    elif kind == "p_Fqext4D":
        spec = IntegrationSpec(
            ((q_min, q_max), (0.0, 1.0)),
            rel_tol=rel_tol,
            abs_tol=1e-14,
            transforms=("log_scale", "sqrt_boundary_upper"),
        )
        res = integrate(lambda x: _husimi_4d_core(x[0], x[1]), spec)
    else:  # pragma: no cover - guarded by caller
        raise ValidationError(kind)
    return FOUR_PI * res.require().value


def build_prior(name: str, config: Config | None = None) -> PriorDensity:
    """Construct one of the named priors under ``config``."""
    cfg = config or Config()
    if name == "p_B":
        if cfg.pb_convention == "sqrt":
            norm = PI * PI / 8
            return PriorDensity(
                name, ("r",) + ANGLES, _ball(), _raw_bures_sqrt, norm,
                lambda y: 4 * y[0] ** 2 / (PI * np.sqrt(1 - y[0] ** 2)),
                reference=PI * PI / 8, meta={"convention": "sqrt"},
            )
        rm = 1.0 - cfg.pb_delta
        # 4 pi/8 * int_0^rm r^2/(1-r^2) dr
        norm = PI / 2 * (math.atanh(rm) - rm)
        return PriorDensity(
            name, ("r",) + ANGLES, _ball(rm), _raw_bures_printed, norm,
            lambda y: (PI / 2) * y[0] ** 2 / (1 - y[0] ** 2) / norm,
            meta={"convention": "printed", "r_max": rm},
        )
    if name == "p_Btrunc":
        return PriorDensity(
            name, ("r",) + ANGLES, _ball(), _raw_btrunc, BTRUNC_MASS,
            lambda y: 3 * y[0] ** 2 * _lam(y[0]) / (1 + math.log(4)),
            reference=BTRUNC_MASS,
        )
    if name in ("p_F", "p_Fq1"):
        core = _fisher_core if name == "p_F" else _fisher_q1_core
        norm = _core_norm(name, min(cfg.rel_tol, 1e-10))

        def raw(x, core=core):
            return core(x[0]) * np.sin(x[1])

        return PriorDensity(
            name, ("r",) + ANGLES, _ball(), raw, norm,
            lambda y, core=core, norm=norm: FOUR_PI * core(y[0]) / norm,
            reference=REFERENCE_NORMALIZATION[name],
        )
    qdom = ((cfg.q_min, cfg.q_max),)
    if name == "p_Bqext4D":
        if not math.isfinite(cfg.q_max):
            raise ValidationError("the 4D Bures prior diverges for an unbounded q range")
        norm = BTRUNC_MASS * math.log(cfg.q_max / cfg.q_min)
        return PriorDensity(
            name, ("q", "r") + ANGLES, qdom + _ball(), _raw_4d_bures, norm,
            lambda y, norm=norm: FOUR_PI * bures_trunc_volume(y[0], y[1]) / norm,
            meta={"q_range": (cfg.q_min, cfg.q_max)},
        )
    if name == "p_Fqext4D":
        if not math.isfinite(cfg.q_max):
            raise ValidationError("q_max must be finite")
        norm = _core_norm(name, cfg.rel_tol_4d, cfg.q_min, cfg.q_max)
        return PriorDensity(
            name, ("q", "r") + ANGLES, qdom + _ball(), _raw_4d_fisher, norm,
            lambda y, norm=norm: FOUR_PI * _husimi_4d_core(y[0], y[1]) / norm,
            meta={"q_range": (cfg.q_min, cfg.q_max)},
        )
    raise ValidationError(f"unknown prior {name!r}; expected one of {PRIOR_NAMES}")


def custom_prior(name, radial_raw: Callable, r_max: float = 1.0, rel_tol=1e-10) -> PriorDensity:
    """Rotationally invariant prior from an angle-free radial volume element."""
    res = integrate_1d(radial_raw, 0.0, r_max, transform="sqrt_boundary_upper", rel_tol=rel_tol).require()
    norm = FOUR_PI * res.value
    return PriorDensity(
        name, ("r",) + ANGLES, _ball(r_max),
        lambda x: radial_raw(x[0]) * np.sin(x[1]), norm,
        lambda y: FOUR_PI * radial_raw(y[0]) / norm,
    )


# -- marginals -----------------------------------------------------------------------


@dataclass
class MarginalCurve:
    variable: str
    grid: np.ndarray
    values: np.ndarray
    normalized: bool = True
    prior: str = ""

    def trapezoid(self) -> float:
        return float(np.trapz(self.values, self.grid)) if hasattr(np, "trapz") else float(
            np.trapezoid(self.values, self.grid)
        )

    def csv(self) -> str:
        return csv_text(
            ("variable", "value", "density"), ((self.variable, g, v) for g, v in zip(self.grid, self.values))
        )

    def write_csv(self, path):
        return atomic_write(path, self.csv())


def default_grid(variable: str, config: Config | None = None, r_max: float = 1.0) -> np.ndarray:
    cfg = config or Config()
    n = cfg.grid_size
    if variable == "q":
        return np.geomspace(cfg.q_min, cfg.q_max, n)
    return np.linspace(0.0, r_max, n + 2)[1:-1]


def marginal(prior: PriorDensity, variable: str, grid=None, normalized=True, rel_tol=1e-8) -> MarginalCurve:
    """Univariate marginal density of ``prior`` on ``grid``."""
    if variable not in prior.core_coords:
        raise ValidationError(f"{prior.name} has no coordinate {variable!r} (angles are uniform)")
    grid = np.asarray(default_grid(variable, r_max=prior.r_max) if grid is None else grid, dtype=float)
    if prior.radial_only:
        values = prior.radial(grid)
    else:
        i = prior.core_coords.index(variable)
        j = 1 - i
        other = prior.core_coords[j]
        lo, hi = prior.core_domain[j]
        values = np.empty_like(grid)
        for k, g in enumerate(grid):

            def f(u, g=g):
                y = np.empty((2, u.size))
                y[i] = g
                y[j] = u
                return prior.reduced_safe(y)

            res = integrate_1d(f, lo, hi, transform=_TRANSFORM[other], rel_tol=rel_tol, abs_tol=1e-15)
            if not res.converged:
                raise IntegrationError(f"marginal of {prior.name} at {variable}={g}: {res.message}", res)
            values[k] = res.value
    scale = 1.0 if normalized else prior.normalization
    return MarginalCurve(variable, grid, values * scale, normalized, prior.name)


# -- dominance near the pure states ----------------------------------------------


@dataclass
class DominanceReport:
    radii: np.ndarray
    orders: list
    consistent: bool
    order: tuple | None
    ties: list
    violations: list
    crossovers: list
    near_zero_radius: float
    near_zero_order: tuple
    near_zero_is_reverse: bool | None
    expected: tuple | None = None

    @property
    def matches_expected(self) -> bool:
        return self.expected is not None and all(tuple(o) == tuple(self.expected) for o in self.orders)

    @property
    def n_matching(self) -> int:
        if self.expected is None:
            return 0
        return sum(tuple(o) == tuple(self.expected) for o in self.orders)


def _order_at(priors, r, rtol=1e-12):
    vals = {p.name: float(p.radial(np.array([r]))[0]) for p in priors}
    order = tuple(sorted(vals, key=lambda k: -vals[k]))
    ties = [
        (a, b)
        for a, b in zip(order, order[1:])
        if abs(vals[a] - vals[b]) <= rtol * max(abs(vals[a]), abs(vals[b]), 1e-300)
    ]
    return order, ties, vals


def pure_state_dominance(
    priors, epsilon=0.005, n=20, near_zero=0.01, expected=None
) -> DominanceReport:
    """Pointwise order of the r-marginals at ``n`` radii in [1 - epsilon, 1)."""
    priors = list(priors)
    if len(priors) < 2:
        raise ValidationError("need at least two priors")
    r_top = min(p.r_max for p in priors)
    radii = np.linspace(1.0 - epsilon, r_top, n, endpoint=False)
    orders, ties, violations = [], [], []
    for r in radii:
        o, t, _ = _order_at(priors, r)
        orders.append(o)
        ties.extend((float(r),) + pair for pair in t)
        if expected is not None and tuple(o) != tuple(expected):
            violations.append((float(r), o))
    consistent = all(o == orders[0] for o in orders) and not ties
    crossovers = []
    for a_i, a in enumerate(priors):
        for b in priors[a_i + 1:]:
            diff = lambda r, a=a, b=b: float(a.radial(np.array([r]))[0] - b.radial(np.array([r]))[0])
            vals = [diff(r) for r in radii]
            for k in range(len(radii) - 1):
                if vals[k] == 0 or vals[k] * vals[k + 1] < 0:
                    r_star = brentq(diff, radii[k], radii[k + 1], xtol=1e-15)
                    crossovers.append((a.name, b.name, r_star))
    zo, _, _ = _order_at(priors, near_zero)
    reverse = None if not consistent else tuple(reversed(orders[0])) == zo
    return DominanceReport(
        radii, orders, consistent, orders[0] if consistent else None, ties, violations,
        crossovers, near_zero, zo, reverse if expected is None else tuple(reversed(expected)) == zo,
        tuple(expected) if expected is not None else None,
    )


# -- the general-q Husimi marginals ------------------------------------------------


def husimi_q_marginal_raw(q, rel_tol=1e-10) -> float:
    """4 pi times the r-integral of the angle-stripped 4D Husimi volume element."""
    res = integrate_1d(
        lambda r: _husimi_4d_core(np.full_like(r, q), r), 0.0, 1.0,
        transform="sqrt_boundary_upper", rel_tol=rel_tol, abs_tol=1e-15,
    ).require()
    return FOUR_PI * res.value


def husimi_q_peak(config: Config | None = None, bracket=(1.0, 20.0)) -> dict:
    """Location and height of the q-marginal maximum, raw and normalized."""
    cfg = config or Config()
    res = minimize_scalar(
        lambda q: -husimi_q_marginal_raw(q), bounds=bracket, method="bounded",
        options={"xatol": 1e-7},
    )
    raw_peak = -float(res.fun)
    norm = build_prior("p_Fqext4D", cfg).normalization
    return {
        "q_peak": float(res.x),
        "raw_value": raw_peak,
        "normalized_value": raw_peak / norm,
        "normalization": norm,
        "q_range": (cfg.q_min, cfg.q_max),
    }


def r_marginal_tail(prior: PriorDensity, radii, rel_tols=(1e-5, 1e-9)) -> dict:
    """Evaluate the r-marginal near r = 1 at several tolerances.

    Returns per-tolerance values and whether the curve turns upward (a positive
    finite-difference slope) over ``radii``.
    """
    radii = np.asarray(radii, dtype=float)
    out = {}
    for tol in rel_tols:
        vals = marginal(prior, "r", radii, rel_tol=tol).values
        slope = np.diff(vals)
        out[tol] = {"values": vals, "upturn": bool(np.any(slope > 0))}
    first, last = out[rel_tols[0]]["values"], out[rel_tols[-1]]["values"]
    return {
        "radii": radii,
        "by_tolerance": out,
        "max_rel_change": float(np.max(np.abs(first - last) / np.abs(last))),
    }
