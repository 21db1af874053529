"""Thresholds of spatially coupled scalar recursions.

Single-system, potential, and coupled-chain thresholds for recursions
x <- f(g(x); eps), with Lyapunov-function checks, coupling-matrix spectra,
and a continuum approximation of the coupled chain.
"""

from .dynamics import Boundary, CoupledConfig, Variant, coupled_step, iterate_single, run_coupled
from .models import SystemModel, evaluate, make_cancelation, make_ldpc_regular
from .threshold import (
    ThresholdResult,
    coupled_threshold_de,
    potential_threshold,
    single_threshold_de,
    single_threshold_minratio,
)

__version__ = "0.1.0"

__all__ = [
    "Boundary",
    "CoupledConfig",
    "SystemModel",
    "ThresholdResult",
    "Variant",
    "coupled_step",
    "coupled_threshold_de",
    "evaluate",
    "iterate_single",
    "make_cancelation",
    "make_ldpc_regular",
    "potential_threshold",
    "run_coupled",
    "single_threshold_de",
    "single_threshold_minratio",
]
