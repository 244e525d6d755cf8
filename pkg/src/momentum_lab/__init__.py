"""Momentum methods for smooth strongly convex functions.

Tuning (GD, HB, TM, C2M), exact root isolation for the C2M rate, local and
global convergence certificates, and a small simulation harness.
"""

__version__ = "0.1.0"

from .algorithm import (
    AlgorithmParams,
    FunctionOracle,
    Method,
    StateSpace,
    Trajectory,
    estimate_rate,
    make_state_space,
    run,
    transfer_g,
)
from .certificates import CertificateReport, Multiplier, certify, worst_case_rate
from .polynomial import KAPPA_THRESHOLD, build_p, count_roots, rho_c2m, sturm_chain
from .schedules import c2m_parameters, complexity_curve, rho_window, schedule

__all__ = [
    "AlgorithmParams", "FunctionOracle", "Method", "StateSpace", "Trajectory",
    "estimate_rate", "make_state_space", "run", "transfer_g",
    "CertificateReport", "Multiplier", "certify", "worst_case_rate",
    "KAPPA_THRESHOLD", "build_p", "count_roots", "rho_c2m", "sturm_chain",
    "c2m_parameters", "complexity_curve", "rho_window", "schedule",
]
