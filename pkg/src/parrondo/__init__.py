"""Exact and Monte Carlo analysis of collective Parrondo games."""

__version__ = "0.1.0"

from .core import (
    GameParams,
    ReducibleChainError,
    SolverError,
    ThresholdMode,
    TransitionRow,
    current,
    evolve,
    p_win,
    stationary,
    transition_matrix,
    transition_row,
    win_prob_b,
)
from .fairness import FairnessQuery, NoFairSolutionError, fair_pb2_closed, fair_pb2_numeric, is_fair
from .original import OriginalParams, original_current, original_no_inversion_check, original_stationary
from .montecarlo import SimConfig, SimReport, empirical_stationary, simulate
