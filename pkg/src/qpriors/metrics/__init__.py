"""Metric tensors: closed forms, the numeric Bures engine and Fisher information."""

from .closed import (
    aberaj_metric_q1,
    bures_bloch_closed,
    bures_extended_closed,
    bures_trunc_antiderivative,
    bures_trunc_q_integral,
    bures_trunc_volume,
    f_eval,
    fisher_husimi_closed,
    fisher_husimi_extended_q1_closed,
    husimi_q1_components,
    spin1_bures_closed,
    spin1_qext_tangential,
)
from .degeneracy import DegeneracyReport, degeneracy_scan
from .fisher import fisher_numeric, husimi_block, husimi_volume_reduced
from .hubner import bures_distance, fidelity, hubner_metric
from .tensor import DEGENERACY_TOL, MetricTensor, volume_element

__all__ = [
    "DEGENERACY_TOL",
    "DegeneracyReport",
    "MetricTensor",
    "aberaj_metric_q1",
    "bures_bloch_closed",
    "bures_distance",
    "bures_extended_closed",
    "bures_trunc_antiderivative",
    "bures_trunc_q_integral",
    "bures_trunc_volume",
    "degeneracy_scan",
    "f_eval",
    "fidelity",
    "fisher_husimi_closed",
    "fisher_husimi_extended_q1_closed",
    "fisher_numeric",
    "hubner_metric",
    "husimi_block",
    "husimi_q1_components",
    "husimi_volume_reduced",
    "spin1_bures_closed",
    "spin1_qext_tangential",
    "volume_element",
]
