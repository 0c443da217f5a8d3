"""Invariant densities and entropy of piecewise affine expanding maps.

The package builds tent-type maps in one and two dimensions, discretises
their transfer operator with Ulam's method, and estimates the metric entropy
of the resulting invariant density in several independent ways.
"""
from .acim import (Density, Grid, UlamOperator, build_grid, build_ulam, empirical_density, l1_distance,
                   orbit, stationary_density)
from .diagnostics import (check_p1, check_s1_s2, entropy_sweep, expansion_report, log_jacobian_l1_continuity,
                          logdist_integral, quasi_markov_scan, slow_recurrence, star_condition)
from .entropy import (EntropyReport, block_entropy, entropy_report, formula_birkhoff, formula_integral,
                      lyapunov_exponents, smb_estimate)
from .errors import ExpandolabError
from .maps import TAU, PiecewiseAffineMap, evaluate, iterate, make_family, skew_tent, tent1d, tent2d
from .partition import cell_of, partition_entropy, refine

__version__ = "0.1.0"

__all__ = [
    "TAU", "Density", "EntropyReport", "ExpandolabError", "Grid", "PiecewiseAffineMap", "UlamOperator",
    "block_entropy", "build_grid", "build_ulam", "cell_of", "check_p1", "check_s1_s2", "empirical_density",
    "entropy_report", "entropy_sweep", "evaluate", "expansion_report", "formula_birkhoff", "formula_integral",
    "iterate", "l1_distance", "log_jacobian_l1_continuity", "logdist_integral", "lyapunov_exponents",
    "make_family", "orbit", "partition_entropy", "quasi_markov_scan", "refine", "skew_tent", "slow_recurrence",
    "smb_estimate", "star_condition", "stationary_density", "tent1d", "tent2d",
]
