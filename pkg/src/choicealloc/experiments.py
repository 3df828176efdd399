"""Benchmark scenarios and machine-checkable experiment tables.

The built-in scenario models a city protecting two tourist hotspots (louvre,
eiffel) with one central resource (an awareness campaign) and two local ones
(cameras, billboards) under a budget of 30. The functions here compare the
closed-form optimum against the CLE/CELP heuristics, sweep location
attractiveness, scale attractiveness uniformly, and invert the budget needed
to hold a target probability.
"""

from __future__ import annotations

import csv
import dataclasses
import io
import math
from dataclasses import dataclass
from typing import TextIO

from ._parallel import parallel_map
from .allocator import (
    DEFAULT_GAMMA_GRID,
    SolveReport,
    best_gamma,
    celp_rule,
    cle_rule,
    solve_closed_form,
)
from .model import Allocation, Evaluation, Scenario, evaluate

DEFAULT_RULE_GAMMAS: tuple[float, ...] = (0.25, 0.5, 0.75)

#: Attractiveness pairs (a1, a2) with a1 + a2 = 10, from strongly asymmetric
#: to symmetric and back.
DEFAULT_ALPHA_PAIRS: tuple[tuple[float, float], ...] = tuple(
    (1.0 + 0.5 * i, 9.0 - 0.5 * i) for i in range(17)
)

DEFAULT_SCALE_FACTORS: tuple[float, ...] = (1.0, 1.1, 1.2, 1.3)


@dataclass(frozen=True)
class ExperimentTable:
    """Labelled numeric rows; the unit of output for experiments and the CLI."""

    name: str
    columns: tuple[str, ...]
    rows: tuple[tuple[str, tuple[float, ...]], ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "columns", tuple(str(c) for c in self.columns))
        rows = tuple((str(label), tuple(values)) for label, values in self.rows)
        object.__setattr__(self, "rows", rows)
        for label, values in rows:
            if len(values) != len(self.columns):
                raise ValueError(
                    f"row {label!r} has {len(values)} values for {len(self.columns)} columns"
                )

    def row(self, label: str) -> dict[str, float]:
        for row_label, values in self.rows:
            if row_label == label:
                return dict(zip(self.columns, values))
        raise KeyError(f"no row labelled {label!r} in table {self.name!r}")

    def value(self, label: str, column: str) -> float:
        cells = self.row(label)
        if column not in cells:
            raise KeyError(f"no column {column!r} in table {self.name!r}")
        return cells[column]

    def to_csv(self, stream: TextIO) -> None:
        """RFC 4180 CSV; numbers use shortest round-trip decimal form."""
        writer = csv.writer(stream)
        writer.writerow(["label", *self.columns])
        for label, values in self.rows:
            writer.writerow([label, *[str(v) for v in values]])

    def to_csv_text(self) -> str:
        buffer = io.StringIO()
        self.to_csv(buffer)
        return buffer.getvalue()

    def as_json_dict(self) -> dict:
        return {
            "name": self.name,
            "columns": list(self.columns),
            "rows": [{"label": label, "values": list(values)} for label, values in self.rows],
        }


@dataclass(frozen=True)
class SweepSpec:
    """Inputs for the sweep experiments; exactly the axis a sweep needs.

    alpha_pairs feeds :func:`attractiveness_sweep` (each pair must sum to the
    fixed total of 10); scale_factors feeds
    :func:`attractiveness_scaling_table`.
    """

    alpha_pairs: tuple[tuple[float, float], ...] = ()
    scale_factors: tuple[float, ...] = ()

    def __post_init__(self) -> None:
        pairs = tuple((float(a), float(b)) for a, b in self.alpha_pairs)
        factors = tuple(float(k) for k in self.scale_factors)
        object.__setattr__(self, "alpha_pairs", pairs)
        object.__setattr__(self, "scale_factors", factors)
        if not pairs and not factors:
            raise ValueError("SweepSpec needs alpha_pairs or scale_factors")


def paris_scenario(scale: float = 1.0) -> Scenario:
    """The built-in two-location city scenario, attractiveness scaled by `scale`.

    At scale 1 the attractiveness values are 6*ln(3) and 6*ln(2).
    """
    return Scenario(
        locations=(
            ("louvre", 6.0 * scale * math.log(3.0)),
            ("eiffel", 6.0 * scale * math.log(2.0)),
        ),
        local_resources=(("cameras", 3.0), ("billboards", 2.0)),
        central_resources=(("campaign", 1.0),),
        budget=30.0,
    )


def _allocation_columns(scenario: Scenario) -> list[str]:
    # Central first, then local resource-major: the conventional reading order.
    cols = [f"x[{res}]" for res in scenario.central_ids]
    cols += [
        f"x[{loc}/{res}]" for res in scenario.local_ids for loc in scenario.location_ids
    ]
    return cols


def _allocation_values(scenario: Scenario, allocation: Allocation) -> list[float]:
    values = [allocation.central[res] for res in scenario.central_ids]
    values += [
        allocation.local[(loc, res)]
        for res in scenario.local_ids
        for loc in scenario.location_ids
    ]
    return values


def _probability_columns(scenario: Scenario) -> list[str]:
    return [f"P[{loc}]%" for loc in scenario.location_ids] + ["overall%"]


def _probability_values(scenario: Scenario, evaluation: Evaluation) -> list[float]:
    values = [100.0 * evaluation.per_location[loc] for loc in scenario.location_ids]
    values.append(100.0 * evaluation.overall)
    return values


def rule_comparison_table(
    scenario: Scenario | None = None,
    gammas: tuple[float, ...] = DEFAULT_RULE_GAMMAS,
) -> ExperimentTable:
    """Optimal allocation versus CLE and CELP at fixed gamma values.

    One row for the optimum, then one per (rule, gamma), with the full
    allocation, per-location hit probabilities, and the overall probability,
    probabilities in percent.
    """
    scenario = scenario or paris_scenario()
    columns = _allocation_columns(scenario) + _probability_columns(scenario)

    def make_row(label: str, allocation: Allocation) -> tuple[str, tuple[float, ...]]:
        evaluation = evaluate(scenario, allocation)
        values = _allocation_values(scenario, allocation)
        values += _probability_values(scenario, evaluation)
        return label, tuple(values)

    rows = [make_row("OPTIMAL", solve_closed_form(scenario).allocation)]
    rows += [make_row(f"CLE({g!r})", cle_rule(scenario, g)) for g in gammas]
    rows += [make_row(f"CELP({g!r})", celp_rule(scenario, g)) for g in gammas]
    return ExperimentTable(
        name="rule_comparison", columns=tuple(columns), rows=tuple(rows)
    )


def attractiveness_sweep(
    spec: SweepSpec,
    base: Scenario | None = None,
    grid: tuple[float, ...] = DEFAULT_GAMMA_GRID,
) -> ExperimentTable:
    """Optimal versus best-gamma heuristics as a pair of alphas shifts.

    The base scenario must have exactly two locations; each (a1, a2) pair
    replaces their attractiveness and must sum to the sweep's fixed total of
    10 so only the asymmetry varies. For every pair the heuristics are tuned
    over the gamma grid.
    """
    base = base or paris_scenario()
    if len(base.locations) != 2:
        raise ValueError(
            f"attractiveness sweep needs exactly two locations, got {len(base.locations)}"
        )
    if not spec.alpha_pairs:
        raise ValueError("SweepSpec.alpha_pairs is empty")
    for a1, a2 in spec.alpha_pairs:
        if abs(a1 + a2 - 10.0) > 1e-9:
            raise ValueError(f"alpha pair ({a1}, {a2}) must sum to 10")

    id1, id2 = base.location_ids

    def run(pair: tuple[float, float]) -> tuple[str, tuple[float, ...]]:
        a1, a2 = pair
        scenario = dataclasses.replace(base, locations=((id1, a1), (id2, a2)))
        optimal = solve_closed_form(scenario).evaluation.overall
        cle_g, cle_eval = best_gamma(scenario, "cle", grid)
        celp_g, celp_eval = best_gamma(scenario, "celp", grid)
        values = (
            a1,
            a2,
            100.0 * optimal,
            cle_g,
            100.0 * cle_eval.overall,
            celp_g,
            100.0 * celp_eval.overall,
        )
        return repr(a1), values

    rows = parallel_map(run, spec.alpha_pairs)
    return ExperimentTable(
        name="attractiveness_sweep",
        columns=(
            "alpha1",
            "alpha2",
            "optimal%",
            "cle_gamma",
            "cle%",
            "celp_gamma",
            "celp%",
        ),
        rows=tuple(rows),
    )


def attractiveness_scaling_table(
    spec: SweepSpec, base: Scenario | None = None
) -> ExperimentTable:
    """Optimal allocations as every location's attractiveness scales by k.

    Block totals (central, local, and each local resource summed over
    locations) are emitted alongside; they are invariant in k because the
    optimum splits the budget by sensitivities alone.
    """
    base = base or paris_scenario()
    if not spec.scale_factors:
        raise ValueError("SweepSpec.scale_factors is empty")
    for k in spec.scale_factors:
        if k < 0:
            raise ValueError(f"scale factors must be >= 0, got {k}")

    columns = (
        ["k"]
        + _allocation_columns(base)
        + ["overall%", "central_total", "local_total"]
        + [f"total[{res}]" for res in base.local_ids]
    )

    def run(k: float) -> tuple[str, tuple[float, ...]]:
        scaled = dataclasses.replace(
            base, locations=tuple((loc, k * a) for loc, a in base.locations)
        )
        report = solve_closed_form(scaled)
        allocation = report.allocation
        central_total = sum(allocation.central.values())
        local_total = sum(allocation.local.values())
        per_resource = [
            sum(allocation.local[(loc, res)] for loc in scaled.location_ids)
            for res in scaled.local_ids
        ]
        values = (
            [k]
            + _allocation_values(scaled, allocation)
            + [100.0 * report.evaluation.overall, central_total, local_total]
            + per_resource
        )
        return repr(k), tuple(values)

    rows = parallel_map(run, spec.scale_factors)
    return ExperimentTable(
        name="attractiveness_scaling", columns=tuple(columns), rows=tuple(rows)
    )


def budget_for_target(scenario: Scenario, target: float) -> float:
    """Budget at which the optimal allocation hits the target overall probability.

    The optimal surrogate scales as budget ** (-sum of betas), so the required
    budget follows in closed form from the current optimum:

        R' = R * (B_now / B_target) ** (1 / sum_betas),  B_target = t / (1 - t).

    The result is verified by re-solving at R'; a mismatch beyond 1e-9 in the
    achieved probability raises, rather than returning a bad budget.
    """
    target = float(target)
    if not 0.0 < target < 1.0:
        raise ValueError(f"target probability must lie strictly between 0 and 1, got {target}")
    beta_sum = math.fsum(
        b for _, b in scenario.local_resources + scenario.central_resources
    )
    b_now = solve_closed_form(scenario).evaluation.surrogate
    b_target = target / (1.0 - target)
    budget = scenario.budget * (b_now / b_target) ** (1.0 / beta_sum)

    achieved = _resolve_at_budget(scenario, budget).evaluation.overall
    if abs(achieved - target) > 1e-9:
        raise ArithmeticError(
            f"budget {budget} reaches overall {achieved}, not the target {target}"
        )
    return budget


def _resolve_at_budget(scenario: Scenario, budget: float) -> SolveReport:
    return solve_closed_form(dataclasses.replace(scenario, budget=budget))
