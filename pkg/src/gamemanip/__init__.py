"""Binding-contract game manipulation on bimatrix games.

Build offer games from a base game, solve them exactly (pure Nash,
dominance, subgame perfection) and compare with what no-regret learners
actually converge to.
"""

from .contracts import (
    BindingOffer,
    CounterOffer,
    ManipulationClass,
    SecondOrderOffer,
    apply_accept,
    apply_counter_decline,
    apply_decline,
    apply_second_order,
    check_counter_conditions,
    check_primary_conditions,
    classify_manipulation,
)
from .dynamics import (
    ConvergenceVerdict,
    MwuaState,
    Trajectory,
    diagnose_convergence,
    mwua_run,
    mwua_step,
    normalize_for_dynamics,
    replicator_field,
    replicator_run,
)
from .equilibria import (
    SpePath,
    TwoStageGame,
    backward_induction_chain,
    best_responses,
    iterated_elimination,
    pure_nash,
    reduced_normal_form,
    strictly_dominated,
    subgame_perfect,
)
from .errors import GameInputError, NumericalFailureError, UnsupportedStructureError
from .game import COL, ROW, ActionProfile, BimatrixGame, affine_rescale, base_game, payoff, validate_game
from .scenarios import build_scenario, run_scenario

__version__ = "0.1.0"
