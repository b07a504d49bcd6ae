"""Quantum priors on qubit states: metrics, volume-element priors, relative
entropies and the comparative noninformativity test."""

from .bayes import MeasurementSpec, info_gain, info_gain_qext, likelihood, likelihood_q, posterior
from .config import Config, load_config
from .errors import (
    DomainError,
    IntegrationError,
    QPriorError,
    SingularStateError,
    SupportMismatchError,
    ValidationError,
)
from .noninform import ClarkeVerdict, RankingReport, clarke_compare, kl, rank
from .priors import PRIOR_NAMES, PriorDensity, build_prior, marginal, pure_state_dominance

__version__ = "0.1.0"

__all__ = [
    "ClarkeVerdict",
    "Config",
    "DomainError",
    "IntegrationError",
    "MeasurementSpec",
    "PRIOR_NAMES",
    "PriorDensity",
    "QPriorError",
    "RankingReport",
    "SingularStateError",
    "SupportMismatchError",
    "ValidationError",
    "build_prior",
    "clarke_compare",
    "info_gain",
    "info_gain_qext",
    "kl",
    "likelihood",
    "likelihood_q",
    "load_config",
    "marginal",
    "posterior",
    "pure_state_dominance",
    "rank",
]
