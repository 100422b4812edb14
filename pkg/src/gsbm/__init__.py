"""Geometric stochastic block model toolkit.

Samples two-community random graphs whose edge probabilities depend on
toroidal distance, runs the two-phase exact-recovery algorithm,
evaluates the information-theoretic threshold quantity, and provides
ground-truth-aware baselines for the impossibility side.
"""

from .divergence import (
    DivergenceReport,
    ch_divergence_discrete,
    ch_divergence_profile,
    information_metric,
    mgf_P,
    mgf_Q,
    rate_function_zero,
    sample_Z,
    sample_Z_many,
)
from .geometry import TorusBox, block_sup_distance, torus_distance, unit_ball_volume
from .oracle import brute_force_mle, flip_bad_census, genie_label, likelihood
from .partition import (
    build_block_grid,
    build_visibility_graph,
    occupied_blocks,
    validate_parameters,
    vertex_visibility_connected,
)
from .profiles import (
    Profile,
    default_epsilon,
    distinguishes,
    evaluate,
    evaluate_scaled,
    gamma,
    make_piecewise_linear_profile,
    make_step_profile,
)
from .recovery import (
    Labeling,
    RecoveryOutcome,
    agreement,
    pairwise_classify,
    propagate,
    refine,
    run_exact_recovery,
)
from .sampler import GsbmGraph, load_graph, mean_degree, sample, save_graph

__version__ = "0.1.0"
