"""Transdimensional transformation-based MCMC."""

from .chain import (
    ModelTarget,
    SampleArchive,
    build_hyper,
    expand_scales,
    f_draws,
    fields_at,
    initial_state,
    predictive_draws,
    read_acceptance_csv,
    read_samples_csv,
    run,
    run_chains,
    write_acceptance_csv,
    write_samples_csv,
)
from .moves import (
    BIRTH,
    DEATH,
    DEFAULT_WEIGHTS,
    MOVE_TYPES,
    NO_CHANGE,
    ChainState,
    MoveDraw,
    MoveScales,
    acceptance_log_prob,
    draw_move,
    log_split_jacobian,
    propose_birth,
    propose_death,
    propose_no_change,
    step,
    transition,
)
