"""Solver, verifier and simulator for a repeated delegation game.

A principal tilts the odds of which of two biased agents (a friend L and an
enemy R) leads each period, and uses that lever to buy policy moderation.
"""
from .commitment import (
    CommitRegime,
    ThresholdSet,
    build_commitment,
    classify,
    competition_threshold,
    polarization,
    region_sweep,
    thresholds,
)
from .engine import (
    ContractAutomaton,
    DecReport,
    InvalidParameter,
    ModelError,
    Params,
    StatePolicy,
    UnsupportedRegime,
    ValueProfile,
    dec_check,
    principal_ex_ante,
    selection_prob,
    solve_values,
    stage_nash,
    stage_utility,
    validate_params,
)
from .nocommitment import (
    NcThresholds,
    PunishmentScheme,
    UncharacterizedRegion,
    b_bar0,
    b_bar_firstbest,
    b_hat,
    build_nocommitment,
    l_punishment,
    principal_punishment,
    solve_sR_and_b_check,
    theta_hat_nc,
)
from .oracle import GridSpec, deviation_probe, grid_search
from .sim import SimConfig, SimTrace, empirical_value, simulate

__version__ = "0.1.0"
