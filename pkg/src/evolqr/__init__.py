"""Robust path-following controller design via multiobjective evolution.

The package couples a robust state-feedback regulator for linear systems with
structured parametric uncertainty to an NSGA-II search (optionally enhanced by
a front-driven local search) that tunes the uncertainty description itself,
and evaluates results with the standard Pareto-front quality indicators.
"""

from .moea import EvolutionConfig
from .molsp import MolspConfig
from .mop import applied_problem, evaluate, generic_problem
from .rlqr import UncertaintySpec, lqr_gain, rlqr_gain_steady
from .vehicle import VehicleParams, default_truck

__all__ = [
    "EvolutionConfig",
    "MolspConfig",
    "UncertaintySpec",
    "VehicleParams",
    "applied_problem",
    "default_truck",
    "evaluate",
    "generic_problem",
    "lqr_gain",
    "rlqr_gain_steady",
]

__version__ = "0.1.0"
