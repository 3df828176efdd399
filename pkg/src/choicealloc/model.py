"""Scenario data model, logit location-choice probabilities, and the convex surrogate.

A scenario describes a set of locations an offender may target, the protective
resources a policy maker can fund (central resources shield every location,
local resources shield one location each), and a total budget. An allocation
assigns a strictly positive amount to every (location, local resource) pair and
to every central resource.

The offender picks a location, or opts out, by maximising a random utility

    U_i = V_i + eps_i,            V_i = alpha_i - sum_j beta_j * ln(x_entry)
    U_opt_out = eps_0

with iid standard Gumbel noise, which yields multinomial-logit choice
probabilities. The probability that any location is hit equals B / (1 + B)
where the surrogate

    B(x) = sum_i exp(alpha_i) / prod(x_entry ** beta)

is convex in x even though the hit probability itself is not. Minimising B
therefore minimises the hit probability, and everything downstream (the
closed-form solver, the numerical oracle) works on B.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

#: Allocation entries below this are rejected as nonpositive; utilities
#: diverge as any entry approaches zero, so the feasible set is open.
POSITIVITY_FLOOR = 1e-12

#: Relative slack on the budget when checking feasibility, absorbing round-off
#: in constructed allocations.
FEASIBILITY_SLACK = 1e-9

#: Largest log-magnitude at which surrogate terms are evaluated with plain
#: products; beyond it everything stays in the log domain (log-sum-exp).
_LINEAR_DOMAIN_LIMIT = 300.0


class ScenarioError(ValueError):
    """A scenario violates one of its invariants, or references an unknown id."""


class AllocationError(ValueError):
    """An allocation is nonpositive, key-mismatched, or over budget."""


@dataclass(frozen=True)
class Scenario:
    """One protection problem instance.

    Attributes:
        locations: ordered (id, alpha) pairs; alpha >= 0 is the location's
            intrinsic attractiveness to the offender.
        local_resources: ordered (id, beta) pairs; beta > 0 is the offender's
            sensitivity to that resource. Each local resource is allocated
            per location.
        central_resources: ordered (id, beta) pairs; a central resource
            protects all locations at once.
        budget: total amount available, > 0.

    Ids must be distinct across all three lists, locations must be nonempty,
    and at least one resource (local or central) must exist.
    """

    locations: tuple[tuple[str, float], ...]
    local_resources: tuple[tuple[str, float], ...]
    central_resources: tuple[tuple[str, float], ...]
    budget: float

    def __post_init__(self) -> None:
        object.__setattr__(
            self, "locations", tuple((str(i), float(a)) for i, a in self.locations)
        )
        object.__setattr__(
            self,
            "local_resources",
            tuple((str(i), float(b)) for i, b in self.local_resources),
        )
        object.__setattr__(
            self,
            "central_resources",
            tuple((str(i), float(b)) for i, b in self.central_resources),
        )
        object.__setattr__(self, "budget", float(self.budget))
        self._validate()

    def _validate(self) -> None:
        if not self.locations:
            raise ScenarioError("locations must be nonempty")
        if not self.local_resources and not self.central_resources:
            raise ScenarioError("at least one local or central resource is required")
        ids = [i for i, _ in self.locations]
        ids += [i for i, _ in self.local_resources]
        ids += [i for i, _ in self.central_resources]
        if len(set(ids)) != len(ids):
            dupes = sorted({i for i in ids if ids.count(i) > 1})
            raise ScenarioError(f"ids must be distinct across all lists, got duplicates {dupes}")
        for loc, alpha in self.locations:
            if not math.isfinite(alpha) or alpha < 0:
                raise ScenarioError(f"location {loc!r}: alpha must be finite and >= 0, got {alpha}")
        for res, beta in self.local_resources + self.central_resources:
            if not math.isfinite(beta) or beta <= 0:
                raise ScenarioError(f"resource {res!r}: beta must be finite and > 0, got {beta}")
        if not math.isfinite(self.budget) or self.budget <= 0:
            raise ScenarioError(f"budget must be finite and > 0, got {self.budget}")

    @property
    def location_ids(self) -> tuple[str, ...]:
        return tuple(i for i, _ in self.locations)

    @property
    def local_ids(self) -> tuple[str, ...]:
        return tuple(i for i, _ in self.local_resources)

    @property
    def central_ids(self) -> tuple[str, ...]:
        return tuple(i for i, _ in self.central_resources)

    @property
    def n_entries(self) -> int:
        """Number of allocation entries: |locations|*|local| + |central|."""
        return len(self.locations) * len(self.local_resources) + len(self.central_resources)


@dataclass(frozen=True)
class Allocation:
    """A strictly positive budget split.

    Attributes:
        local: (location-id, local-resource-id) -> amount.
        central: central-resource-id -> amount.

    Positivity is enforced here; key agreement with a scenario and the budget
    bound are checked by the operations that take a scenario.
    """

    local: dict[tuple[str, str], float]
    central: dict[str, float]

    def __post_init__(self) -> None:
        local = {(str(i), str(j)): float(v) for (i, j), v in self.local.items()}
        central = {str(j): float(v) for j, v in self.central.items()}
        object.__setattr__(self, "local", local)
        object.__setattr__(self, "central", central)
        for key, value in list(local.items()) + list(central.items()):
            if not math.isfinite(value) or value < POSITIVITY_FLOOR:
                raise AllocationError(
                    f"entry {key!r} must be at least {POSITIVITY_FLOOR}, got {value}"
                )

    @property
    def total(self) -> float:
        return float(sum(self.local.values()) + sum(self.central.values()))


@dataclass(frozen=True)
class Evaluation:
    """Choice probabilities and surrogate value for one allocation.

    Attributes:
        per_location: location-id -> probability the offender targets it.
        opt_out: probability the offender targets nothing.
        overall: probability some location is targeted (sum of per_location).
        surrogate: convex surrogate B with overall = B / (1 + B).
        utilities: location-id -> deterministic utility V.
    """

    per_location: dict[str, float]
    opt_out: float
    overall: float
    surrogate: float
    utilities: dict[str, float]


@dataclass(frozen=True)
class _Design:
    """Vectorised view of a scenario; entry order is the canonical flat order."""

    local_keys: tuple[tuple[str, str], ...]
    central_keys: tuple[str, ...]
    alpha: np.ndarray       # per location
    beta: np.ndarray        # per entry
    incidence: np.ndarray   # |locations| x n_entries, 1.0 where entry enters V_i

    @property
    def n_entries(self) -> int:
        return self.beta.size


@lru_cache(maxsize=256)
def _design(scenario: Scenario) -> _Design:
    n_loc = len(scenario.locations)
    n_local = len(scenario.local_resources)
    local_keys = tuple(
        (loc, res) for loc in scenario.location_ids for res in scenario.local_ids
    )
    central_keys = scenario.central_ids
    alpha = np.array([a for _, a in scenario.locations], dtype=float)
    local_betas = [b for _, b in scenario.local_resources]
    central_betas = [b for _, b in scenario.central_resources]
    beta = np.array(local_betas * n_loc + central_betas, dtype=float)
    n = beta.size
    incidence = np.zeros((n_loc, n), dtype=float)
    for i in range(n_loc):
        incidence[i, i * n_local : (i + 1) * n_local] = 1.0
        incidence[i, n_loc * n_local :] = 1.0
    return _Design(local_keys, central_keys, alpha, beta, incidence)


def entry_keys(scenario: Scenario) -> list[tuple[str, str] | str]:
    """Canonical flat entry order: local pairs location-major, then central ids."""
    d = _design(scenario)
    return list(d.local_keys) + list(d.central_keys)


def _check_keys(scenario: Scenario, allocation: Allocation) -> _Design:
    d = _design(scenario)
    if set(allocation.local) != set(d.local_keys):
        missing = set(d.local_keys) - set(allocation.local)
        extra = set(allocation.local) - set(d.local_keys)
        raise AllocationError(
            f"local keys do not match scenario (missing {sorted(missing)}, extra {sorted(extra)})"
        )
    if set(allocation.central) != set(d.central_keys):
        missing = set(d.central_keys) - set(allocation.central)
        extra = set(allocation.central) - set(d.central_keys)
        raise AllocationError(
            f"central keys do not match scenario (missing {sorted(missing)}, extra {sorted(extra)})"
        )
    return d


def check_feasible(scenario: Scenario, allocation: Allocation) -> None:
    """Raise unless the allocation matches the scenario's keys and fits the budget."""
    _check_keys(scenario, allocation)
    slack = FEASIBILITY_SLACK * scenario.budget
    if allocation.total > scenario.budget + slack:
        raise AllocationError(
            f"allocation total {allocation.total} exceeds budget {scenario.budget}"
        )


def flatten(scenario: Scenario, allocation: Allocation) -> np.ndarray:
    """Allocation as a vector in canonical entry order."""
    d = _check_keys(scenario, allocation)
    values = [allocation.local[k] for k in d.local_keys]
    values += [allocation.central[k] for k in d.central_keys]
    return np.array(values, dtype=float)


def unflatten(scenario: Scenario, x: np.ndarray) -> Allocation:
    """Inverse of :func:`flatten`."""
    d = _design(scenario)
    x = np.asarray(x, dtype=float)
    if x.shape != (d.n_entries,):
        raise AllocationError(f"expected vector of length {d.n_entries}, got shape {x.shape}")
    n_local = len(d.local_keys)
    local = {k: float(v) for k, v in zip(d.local_keys, x[:n_local])}
    central = {k: float(v) for k, v in zip(d.central_keys, x[n_local:])}
    return Allocation(local=local, central=central)


def _utilities(design: _Design, x: np.ndarray) -> np.ndarray:
    """Deterministic utilities V_i, which are also the log surrogate terms."""
    return design.alpha - design.incidence @ (design.beta * np.log(x))


def _surrogate_terms_linear(design: _Design, x: np.ndarray) -> np.ndarray:
    """Per-location surrogate terms via explicit products of powers.

    Independent of the log route: exp(alpha_i) divided by the product of
    x ** beta over the entries in location i's utility.
    """
    powers = x ** design.beta
    denominators = np.prod(np.power(powers[None, :], design.incidence), axis=1)
    return np.exp(design.alpha) / denominators


def _linear_domain_ok(design: _Design, x: np.ndarray, utilities: np.ndarray) -> bool:
    log_denoms = design.incidence @ (design.beta * np.log(x))
    bound = _LINEAR_DOMAIN_LIMIT
    return bool(
        np.max(np.abs(utilities)) < bound
        and np.max(design.alpha) < bound
        and np.max(np.abs(log_denoms)) < bound
    )


def _exp_or_inf(ln_value: float) -> float:
    """exp() that saturates to inf instead of raising past the double range."""
    return math.exp(ln_value) if ln_value < 709.0 else math.inf


def _surrogate_value(design: _Design, x: np.ndarray) -> float:
    v = _utilities(design, x)
    if _linear_domain_ok(design, x, v):
        return float(np.sum(_surrogate_terms_linear(design, x)))
    return _exp_or_inf(float(np.logaddexp.reduce(v)))


def _gradient_vector(design: _Design, x: np.ndarray) -> np.ndarray:
    """Gradient of the surrogate: -beta_k * (sum of terms containing k) / x_k."""
    terms = np.exp(_utilities(design, x))
    return -design.beta * (design.incidence.T @ terms) / x


def deterministic_utility(scenario: Scenario, allocation: Allocation, location: str) -> float:
    """V at one location: alpha minus beta-weighted logs of the relevant entries."""
    if location not in scenario.location_ids:
        raise ScenarioError(f"unknown location id {location!r}")
    _check_keys(scenario, allocation)
    alpha = dict(scenario.locations)[location]
    v = alpha
    for res, beta in scenario.local_resources:
        v -= beta * math.log(allocation.local[(location, res)])
    for res, beta in scenario.central_resources:
        v -= beta * math.log(allocation.central[res])
    return v


def surrogate_B(scenario: Scenario, allocation: Allocation) -> float:
    """Surrogate value B, the sum over locations of exp(alpha) / prod(x ** beta).

    Requires positive entries matching the scenario; the budget bound is not
    needed here (B is defined on all positive allocations).
    """
    d = _check_keys(scenario, allocation)
    return _surrogate_value(d, flatten(scenario, allocation))


def gradient_B(scenario: Scenario, allocation: Allocation) -> dict[tuple[str, str] | str, float]:
    """Partial derivatives of B, keyed like the allocation's entries.

    For a local entry the derivative is -beta * term_i / x; for a central
    entry it is -beta * B / x. Every component is strictly negative.
    """
    d = _check_keys(scenario, allocation)
    g = _gradient_vector(d, flatten(scenario, allocation))
    keys = list(d.local_keys) + list(d.central_keys)
    return {k: float(v) for k, v in zip(keys, g)}


def evaluate(scenario: Scenario, allocation: Allocation) -> Evaluation:
    """Choice probabilities and surrogate for a feasible allocation.

    Probabilities come from the logit route (softmax over utilities and the
    zero-utility opt-out), computed in the log domain for stability. The
    surrogate comes from the product route whenever the terms fit comfortably
    in double precision; the two routes agree to ~1e-15 relative and the
    returned overall probability is surrogate / (1 + surrogate).
    """
    d = _check_keys(scenario, allocation)
    check_feasible(scenario, allocation)
    x = flatten(scenario, allocation)
    v = _utilities(d, x)
    ln_b = float(np.logaddexp.reduce(v))
    ln_denom = float(np.logaddexp(0.0, ln_b))
    per_location = np.exp(v - ln_denom)
    opt_out = math.exp(-ln_denom)
    if _linear_domain_ok(d, x, v):
        surrogate = float(np.sum(_surrogate_terms_linear(d, x)))
    else:
        surrogate = _exp_or_inf(ln_b)
    if math.isinf(surrogate):
        overall = math.exp(ln_b - ln_denom)
    else:
        overall = surrogate / (1.0 + surrogate)
    ids = scenario.location_ids
    return Evaluation(
        per_location={i: float(p) for i, p in zip(ids, per_location)},
        opt_out=opt_out,
        overall=overall,
        surrogate=surrogate,
        utilities={i: float(u) for i, u in zip(ids, v)},
    )
