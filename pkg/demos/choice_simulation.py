#!/usr/bin/env python3
"""Check the analytic choice probabilities against brute-force sampling.

Each simulated offender adds independent standard Gumbel noise to every
alternative's utility (locations, plus opting out at utility zero) and picks
the argmax. With a million draws the empirical frequencies should sit within
a few binomial standard errors of the logit probabilities.
"""

import math

from choicealloc import OPT_OUT, evaluate, paris_scenario, sample_choices, solve_closed_form

scenario = paris_scenario()
allocation = solve_closed_form(scenario).allocation
evaluation = evaluate(scenario, allocation)

draws = 1_000_000
sample = sample_choices(scenario, allocation, draws=draws, seed=7)

print(f"{draws:,} simulated choices under the optimal allocation (seed 7):\n")
print(f"{'alternative':<12} {'analytic':>10} {'empirical':>10} {'error/se':>9}")
analytic = {**evaluation.per_location, OPT_OUT: evaluation.opt_out}
for label, p in analytic.items():
    frequency = sample.counts[label] / draws
    se = math.sqrt(p * (1.0 - p) / draws)
    print(f"{label:<12} {p:>10.6f} {frequency:>10.6f} {(frequency - p) / se:>+9.2f}")

hit = sum(sample.counts[loc] for loc, _ in scenario.locations) / draws
print(f"\nOverall hit frequency {hit:.6f} vs analytic {evaluation.overall:.6f} (= 1/109)")
