"""Tsallis-regularized Nash equilibria of normal-form games via Macaulay matrices."""

from .exact import Solution, SolutionSet, Tolerances, solve_exact
from .game import (
    BUILTIN_GAMES,
    Game,
    GameError,
    TsallisParams,
    exploitability,
    exploitability_bound,
    expected_utility,
    gradient,
    gumbel_br_check,
    make_bach_stravinsky,
    make_chicken,
    make_stag_hunt,
    normalize_payoffs,
    project_tangent,
    random_game,
    tsallis_best_response,
    tsallis_gradient,
    uniform_profile,
)
from .harness import (
    ExperimentReport,
    jensen_shannon,
    macaulay_growth_table,
    profile_js,
    run_lstsq_experiment,
    run_recovery_experiment,
)
from .lstsq import ls_batch_experiment, solve_least_squares_2p
from .macaulay import build_macaulay, build_shift_selectors, count_rows_cols
from .mvp import PolynomialSystem, build_ne_mvp, recover_strategy
from .polynomial import MonomialOrdering, Polynomial, monomial_basis, vandermonde_vector
from .stochastic import SolverConfig, StageConfig, load_config, preset, solve_stochastic

__version__ = "0.1.0"
