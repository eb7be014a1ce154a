"""Lattice toolkit for the discrete infinity Laplace equation ``S+ u = S- u``."""

from .coneops import (
    ConeCheckConfig,
    ConeParams,
    ScalarField,
    analytic_eval,
    analytic_function,
    ball_max,
    ball_min,
    cone_comparison_check,
    cone_eval,
    epsilon_convexity_check,
    punctured_ball_check,
    residual,
    s_minus,
    s_plus,
)
from .fieldio import read_field, write_field, write_report
from .lattice import LatticeDomain, RegionLabels, Stencil, build_domain, classify_regions, make_stencil, setup
from .results import CheckResult
from .solver import BoundaryData, SolveConfig, SolveReport, lower_upper_bracket, midpoint_sweep, solve
from .verify import (
    ConvergenceRow,
    convergence_study,
    envelope_chain_check,
    jensen_gap,
    lemma1_check,
    lemma2_check,
)

__version__ = "0.1.0"
