"""Run configuration: q range, p_B convention, quadrature tolerances.

Configuration files are flat ``key = value`` text. Blank lines and lines
starting with ``#`` are ignored. The environment variable ``QPRIOR_CONFIG``
names a default file.
"""

from __future__ import annotations

import dataclasses
import os
from dataclasses import dataclass, fields
from pathlib import Path

from .errors import ValidationError

CONFIG_ENV = "QPRIOR_CONFIG"


@dataclass(frozen=True)
class Config:
    q_min: float = 0.5
    q_max: float = 500.0
    pb_convention: str = "sqrt"  # "sqrt" | "printed"
    pb_delta: float = 1e-6  # radial cutoff 1 - delta for the printed p_B form
    rel_tol: float = 1e-8
    rel_tol_4d: float = 1e-5
    abs_tol: float = 1e-13
    max_evals: int = 100_000_000
    out_dir: str = "qprior-out"
    seed: int = 20071126
    grid_size: int = 200

    def __post_init__(self):
        if not self.q_min < self.q_max:
            raise ValidationError(f"q_min ({self.q_min}) must be below q_max ({self.q_max})")
        if self.q_min <= 0:
            raise ValidationError("q_min must be positive")
        if self.pb_convention not in ("sqrt", "printed"):
            raise ValidationError(f"pb_convention must be 'sqrt' or 'printed', got {self.pb_convention!r}")
        if min(self.rel_tol, self.rel_tol_4d, self.abs_tol) <= 0:
            raise ValidationError("tolerances must be positive")
        if not 0 < self.pb_delta < 1:
            raise ValidationError("pb_delta must lie in (0, 1)")

    def replace(self, **changes) -> "Config":
        changes = {k: v for k, v in changes.items() if v is not None}
        return dataclasses.replace(self, **changes)


def _coerce(name: str, text: str):
    kinds = {f.name: f.type for f in fields(Config)}
    if name not in kinds:
        raise ValidationError(f"unknown config key {name!r}")
    kind = kinds[name]
    try:
        if kind == "int":
            return int(float(text))
        if kind == "float":
            return float(text)
    except ValueError as exc:
        raise ValidationError(f"bad value for {name}: {text!r}") from exc
    return text


def parse_config_text(text: str) -> dict:
    values = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValidationError(f"config line {lineno}: expected 'key = value'")
        key, value = (part.strip() for part in line.split("=", 1))
        values[key] = _coerce(key, value)
    return values


def load_config(path: str | os.PathLike | None = None, **overrides) -> Config:
    """Build a Config from defaults, an optional file and explicit overrides.

    When ``path`` is None the file named by ``$QPRIOR_CONFIG`` is used if set.
    Overrides whose value is None are ignored so CLI flags can be passed through
    unconditionally.
    """
    if path is None:
        path = os.environ.get(CONFIG_ENV) or None
    values = {}
    if path is not None:
        values.update(parse_config_text(Path(path).read_text()))
    values.update({k: v for k, v in overrides.items() if v is not None})
    return Config(**values)
