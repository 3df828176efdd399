"""Budget allocation against logit-driven offender location choice.

Core objects live in :mod:`choicealloc.model`; allocation rules in
:mod:`choicealloc.allocator`; the independent numerical oracle in
:mod:`choicealloc.solver`; Monte Carlo choice sampling in
:mod:`choicealloc.simulate`; benchmark tables in
:mod:`choicealloc.experiments`; file I/O and the command line in
:mod:`choicealloc.cli`.
"""

from .allocator import (
    DEFAULT_GAMMA_GRID,
    SolveReport,
    best_gamma,
    celp_rule,
    cle_rule,
    solve_closed_form,
)
from .experiments import (
    DEFAULT_ALPHA_PAIRS,
    DEFAULT_RULE_GAMMAS,
    DEFAULT_SCALE_FACTORS,
    ExperimentTable,
    SweepSpec,
    attractiveness_scaling_table,
    attractiveness_sweep,
    budget_for_target,
    paris_scenario,
    rule_comparison_table,
)
from .model import (
    Allocation,
    AllocationError,
    Evaluation,
    POSITIVITY_FLOOR,
    Scenario,
    ScenarioError,
    check_feasible,
    deterministic_utility,
    entry_keys,
    evaluate,
    flatten,
    gradient_B,
    surrogate_B,
    unflatten,
)
from .simulate import OPT_OUT, ChoiceSample, sample_choices
from .solver import ConvergenceError, OracleConfig, kkt_residual, solve_numerical

__version__ = "0.1.0"

__all__ = [
    "Allocation",
    "AllocationError",
    "ChoiceSample",
    "ConvergenceError",
    "DEFAULT_ALPHA_PAIRS",
    "DEFAULT_GAMMA_GRID",
    "DEFAULT_RULE_GAMMAS",
    "DEFAULT_SCALE_FACTORS",
    "Evaluation",
    "ExperimentTable",
    "OPT_OUT",
    "OracleConfig",
    "POSITIVITY_FLOOR",
    "Scenario",
    "ScenarioError",
    "SolveReport",
    "SweepSpec",
    "attractiveness_scaling_table",
    "attractiveness_sweep",
    "best_gamma",
    "budget_for_target",
    "celp_rule",
    "check_feasible",
    "cle_rule",
    "deterministic_utility",
    "entry_keys",
    "evaluate",
    "flatten",
    "gradient_B",
    "kkt_residual",
    "paris_scenario",
    "rule_comparison_table",
    "sample_choices",
    "solve_closed_form",
    "solve_numerical",
    "surrogate_B",
    "unflatten",
]
