"""Budget allocation rules: the closed-form optimum and two field heuristics.

The optimum splits the budget across resources proportionally to their
sensitivities beta, then splits each local resource's share across locations
by a softmax of alpha / (1 + sum of local betas). The CLE and CELP rules mimic
how practitioners allocate: a fraction gamma goes to central resources (split
equally), the rest to local resources, split either equally over locations
(CLE) or proportionally to attractiveness (CELP).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._parallel import parallel_map
from .model import (
    Allocation,
    Evaluation,
    Scenario,
    _design,
    _gradient_vector,
    evaluate,
    flatten,
)

#: Grid searched by default when tuning gamma for the heuristic rules.
DEFAULT_GAMMA_GRID: tuple[float, ...] = tuple(g / 100 for g in range(1, 100))

RULES = ("cle", "celp")


@dataclass(frozen=True)
class SolveReport:
    """An allocation together with its optimality certificate.

    Attributes:
        allocation: the solution, summing to the full budget.
        evaluation: probabilities and surrogate at the solution.
        multiplier: the (negative) Lagrange multiplier on the budget plane.
        stationarity_residual: max |dB/dx_k - multiplier| over entries; at a
            true optimum every partial derivative equals the multiplier.
    """

    allocation: Allocation
    evaluation: Evaluation
    multiplier: float
    stationarity_residual: float


def _check_gamma(gamma: float) -> float:
    gamma = float(gamma)
    if not 0.0 < gamma < 1.0:
        raise ValueError(f"gamma must lie strictly between 0 and 1, got {gamma}")
    return gamma


def solve_closed_form(scenario: Scenario) -> SolveReport:
    """Globally optimal allocation, in closed form.

    Central resource j receives beta_j / (sum of all betas) * budget. Local
    resource j's identical share is further split over locations i with
    weights softmax(alpha_i / (1 + sum of local betas)). The multiplier and
    the stationarity residual certify optimality of the result; the residual
    is pure floating-point noise (at most ~1e-8 relative to the multiplier).
    """
    all_betas = [b for _, b in scenario.local_resources + scenario.central_resources]
    beta_sum = math.fsum(all_betas)
    local_beta_sum = math.fsum(b for _, b in scenario.local_resources)
    r = scenario.budget

    alphas = np.array([a for _, a in scenario.locations], dtype=float)
    scaled = alphas / (1.0 + local_beta_sum)
    shares = np.exp(scaled - scaled.max())
    shares /= shares.sum()

    local = {}
    for i, loc in enumerate(scenario.location_ids):
        for res, beta in scenario.local_resources:
            local[(loc, res)] = beta * r / beta_sum * float(shares[i])
    central = {res: beta * r / beta_sum for res, beta in scenario.central_resources}
    allocation = Allocation(local=local, central=central)

    # Multiplier from the stationarity condition, assembled in the log domain
    # because R ** (1 + sum beta) overflows quickly.
    log_weight_sum = float(np.logaddexp.reduce(scaled))
    ln_lam = (
        (1.0 + local_beta_sum) * log_weight_sum
        + (1.0 + beta_sum) * (math.log(beta_sum) - math.log(r))
        - math.fsum(b * math.log(b) for b in all_betas)
    )
    multiplier = -math.exp(ln_lam)

    g = _gradient_vector(_design(scenario), flatten(scenario, allocation))
    residual = float(np.max(np.abs(g - multiplier)))
    return SolveReport(
        allocation=allocation,
        evaluation=evaluate(scenario, allocation),
        multiplier=multiplier,
        stationarity_residual=residual,
    )


def cle_rule(scenario: Scenario, gamma: float) -> Allocation:
    """Central and Location-Equal rule.

    gamma * budget is split equally over central resources; the remainder is
    split equally over every (location, local resource) pair. Defined only
    when both resource groups are nonempty.
    """
    gamma = _check_gamma(gamma)
    _require_both_groups(scenario, "CLE")
    r = scenario.budget
    n_pairs = len(scenario.locations) * len(scenario.local_resources)
    central_amount = gamma * r / len(scenario.central_resources)
    local_amount = (1.0 - gamma) * r / n_pairs
    return Allocation(
        local={
            (loc, res): local_amount
            for loc in scenario.location_ids
            for res in scenario.local_ids
        },
        central={res: central_amount for res in scenario.central_ids},
    )


def celp_rule(scenario: Scenario, gamma: float) -> Allocation:
    """Central-Equal and Location-Proportional rule.

    Central split as in CLE; each local resource's share of (1 - gamma) *
    budget is divided over locations proportionally to their attractiveness.
    Requires every location's alpha to be positive, otherwise some entry
    would receive nothing.
    """
    gamma = _check_gamma(gamma)
    _require_both_groups(scenario, "CELP")
    alpha_total = math.fsum(a for _, a in scenario.locations)
    if alpha_total <= 0.0:
        raise ValueError("CELP is undefined when every location has zero attractiveness")
    for loc, alpha in scenario.locations:
        if alpha <= 0.0:
            raise ValueError(
                f"CELP would allocate nothing to location {loc!r} (alpha = {alpha})"
            )
    r = scenario.budget
    per_resource = (1.0 - gamma) * r / len(scenario.local_resources)
    central_amount = gamma * r / len(scenario.central_resources)
    weights = {loc: alpha / alpha_total for loc, alpha in scenario.locations}
    return Allocation(
        local={
            (loc, res): per_resource * weights[loc]
            for loc in scenario.location_ids
            for res in scenario.local_ids
        },
        central={res: central_amount for res in scenario.central_ids},
    )


def _require_both_groups(scenario: Scenario, rule: str) -> None:
    if not scenario.central_resources or not scenario.local_resources:
        raise ValueError(
            f"{rule} needs at least one central and one local resource; "
            f"got {len(scenario.central_resources)} central, {len(scenario.local_resources)} local"
        )


def best_gamma(
    scenario: Scenario,
    rule: str,
    grid: tuple[float, ...] = DEFAULT_GAMMA_GRID,
) -> tuple[float, Evaluation]:
    """Grid-search gamma for a heuristic rule, minimising overall probability.

    Ties break toward the smaller gamma. Grid points are evaluated
    independently (optionally in parallel), so the result does not depend on
    evaluation order.
    """
    rule = rule.lower()
    if rule not in RULES:
        raise ValueError(f"unknown rule {rule!r}, expected one of {RULES}")
    grid = tuple(float(g) for g in grid)
    if not grid:
        raise ValueError("gamma grid must be nonempty")
    for g in grid:
        _check_gamma(g)
    apply_rule = cle_rule if rule == "cle" else celp_rule

    def run(gamma: float) -> tuple[float, Evaluation]:
        return gamma, evaluate(scenario, apply_rule(scenario, gamma))

    best: tuple[float, Evaluation] | None = None
    for gamma, evaluation in parallel_map(run, grid):
        if (
            best is None
            or evaluation.overall < best[1].overall
            or (evaluation.overall == best[1].overall and gamma < best[0])
        ):
            best = (gamma, evaluation)
    assert best is not None
    return best
