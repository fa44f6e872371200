"""Labor allocation under the four fairness strategies.

S0   every agent separately maximizes own family utility, treating the rest
     of the economy as an exogenous labor supply at the believed level.
SA   a central evaluation maximizes mean family utility over the joint labor
     vector, with production evaluated at the candidate vector itself.
Sb   every agent separately chooses own labor like S0, but the quantity each
     agent maximizes is the lowest family utility in the society. Everyone
     else is believed to repeat their last observed hours (newcomers are
     imputed at the belief floor), and the chooser's own hours still
     enter everyone's believed production total. Agents whose own utility is
     the believed minimum simply maximize it and stay near their private
     optimum; everyone else overworks until their own utility falls to that
     bottom, which disperses hours instead of uniformly exhausting the day.
SAb  a central evaluation maximizes the lowest family utility with
     self-consistent production, warm-started like SA plus overworked seeds;
     min objectives sit on near-flat manifolds, so without those seeds the
     search settles on whichever branch the start happened to be on.

Family size is strategy-independent (the fertility bracket factors out of
family utility), so every strategy assigns fertility via choose_k. Solvers
run in unconstrained space through the bounded logistic transform, so every
candidate labor vector is strictly inside (0, 24) hours.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import IntEnum

import numpy as np

from .economy import (
    DAY_HOURS,
    SIGMA_FORMS,
    Preferences,
    choose_k,
    consumption,
    family_utility,
    fertility_bracket,
)
from .errors import ParameterError
from .optimizer import (
    Objective,
    SimplexOptions,
    bounded_transform,
    inverse_transform,
    maximize,
    nelder_mead_max,
)
from .stochastics import RngStream


class StrategyKind(IntEnum):
    """The four strategies; enum values double as rng lineage tags."""

    S0 = 0
    SA = 1
    SB = 2
    SAB = 3

    @property
    def token(self) -> str:
        return _TOKENS[self]

    @classmethod
    def from_token(cls, text: str) -> "StrategyKind":
        for kind, token in _TOKENS.items():
            if token == text:
                return kind
        raise ParameterError(f"unknown strategy token {text!r}, expected one of 0, A, b, Ab")


_TOKENS = {
    StrategyKind.S0: "0",
    StrategyKind.SA: "A",
    StrategyKind.SB: "b",
    StrategyKind.SAB: "Ab",
}

PLANNER_KINDS = (StrategyKind.SA, StrategyKind.SAB)
MYOPIC_KINDS = (StrategyKind.S0, StrategyKind.SB)
MINIMUM_KINDS = (StrategyKind.SB, StrategyKind.SAB)


@dataclass(frozen=True)
class SocietyParams:
    """Society-wide economic constants, fixed at founding."""

    gamma: float
    k_max: int = 10
    belief_floor: float = 12.0
    sigma_form: str = "geometric"

    def __post_init__(self) -> None:
        if not self.gamma > 1.0:
            raise ParameterError(f"gamma must be > 1, got {self.gamma}")
        if self.k_max < 0:
            raise ParameterError(f"k_max must be >= 0, got {self.k_max}")
        if not self.belief_floor >= 0.0:
            raise ParameterError(f"belief_floor must be >= 0, got {self.belief_floor}")
        if self.sigma_form not in SIGMA_FORMS:
            raise ParameterError(
                f"sigma_form must be one of {SIGMA_FORMS}, got {self.sigma_form!r}"
            )


@dataclass(frozen=True)
class AllocationResult:
    """One generation's allocation; arrays align with the input agent order."""

    labor: np.ndarray
    fertility: np.ndarray
    consumptions: np.ndarray
    utilities: np.ndarray
    objective: float


def belief_per_capita(prev_total_labor: float, n_living: int, floor: float = 12.0) -> float:
    """Hours each other agent is believed to work: previous per-capita labor, floored."""
    if n_living < 1:
        raise ParameterError(f"n_living must be >= 1, got {n_living}")
    if prev_total_labor < 0.0:
        raise ParameterError(f"prev_total_labor must be >= 0, got {prev_total_labor}")
    if not floor >= 0.0:
        raise ParameterError(f"floor must be >= 0, got {floor}")
    return max(prev_total_labor / n_living, floor)


def myopic_others_labor(prev_total_labor: float, n_living: int, floor: float = 12.0) -> float:
    """Exogenous total labor one agent attributes to everyone else.

    Equals max(prev_total_labor - prev_total_labor/n, floor*(n-1)): the
    previous total less one per-capita share, floored so generation 0 and
    shrinking societies never believe in a near-empty economy.
    """
    return (n_living - 1) * belief_per_capita(prev_total_labor, n_living, floor)


def _transform_scalar(u: float) -> float:
    if u >= 0.0:
        s = 1.0 / (1.0 + math.exp(-u))
    else:
        e = math.exp(u)
        s = e / (1.0 + e)
    x = DAY_HOURS * s
    lo = math.nextafter(0.0, DAY_HOURS)
    hi = math.nextafter(DAY_HOURS, 0.0)
    return min(max(x, lo), hi)


@dataclass(frozen=True)
class _Population:
    alphas: np.ndarray
    betas: np.ndarray
    fertility: np.ndarray
    brackets: np.ndarray


def _prepare(prefs: list[Preferences], k_max: int, sigma_form: str) -> _Population:
    alphas = np.array([p.alpha for p in prefs], dtype=float)
    betas = 1.0 - alphas
    fert = np.array([choose_k(p, k_max, sigma_form) for p in prefs], dtype=int)
    brackets = np.array(
        [fertility_bracket(p.sigma, int(k), sigma_form) for p, k in zip(prefs, fert)],
        dtype=float,
    )
    return _Population(alphas, betas, fert, brackets)


def _recorded(
    kind: StrategyKind,
    labor: np.ndarray,
    prefs: list[Preferences],
    fertility: np.ndarray,
    params: SocietyParams,
    prev_total_labor: float,
) -> tuple[np.ndarray, np.ndarray]:
    """Recorded consumption and utility vectors under the kind's accounting."""
    n = len(prefs)
    if kind in PLANNER_KINDS:
        total = float(np.sum(labor))
        others = total - labor
    else:
        others = np.full(n, myopic_others_labor(prev_total_labor, n, params.belief_floor))
    cons = np.array(
        [consumption(float(l), float(o), params.gamma) for l, o in zip(labor, others)]
    )
    utils = np.array(
        [
            family_utility(DAY_HOURS - float(l), float(c), p, int(k))
            for l, c, p, k in zip(labor, cons, prefs, fertility)
        ]
    )
    return cons, utils


def objective_value(
    kind: StrategyKind,
    labor,
    prefs: list[Preferences],
    params: SocietyParams,
    prev_total_labor: float,
) -> float:
    """Mean family utility (S0 diagnostic, SA) or minimum (Sb, SAb) of an allocation."""
    labor = np.asarray(labor, dtype=float)
    if labor.shape != (len(prefs),):
        raise ParameterError("labor vector length must match the agent list")
    pop = _prepare(prefs, params.k_max, params.sigma_form)
    _, utils = _recorded(kind, labor, prefs, pop.fertility, params, prev_total_labor)
    if kind in MINIMUM_KINDS:
        return float(np.min(utils))
    return float(np.mean(utils))


def allocate(
    kind: StrategyKind,
    prefs: list[Preferences],
    ids: list[int],
    params: SocietyParams,
    prev_total_labor: float,
    options: SimplexOptions | None = None,
    stream: RngStream | None = None,
    warm_start=None,
    use_warm_start: bool = True,
    prev_labor=None,
) -> AllocationResult:
    """Solve one generation's labor choice for every living agent.

    `ids` key the per-agent optimizer substreams, so permuting the agent list
    permutes the outputs. `warm_start` optionally adds a caller-supplied labor
    vector to the planner's start candidates (SA/SAb only). `prev_labor`
    optionally gives each agent's hours from the previous generation, aligned
    with `prefs`, with NaN marking agents that have none; the minimum-utility
    strategies use it as the believed behavior of others. NaN entries are
    imputed at the belief floor; omitting the whole vector imputes everyone
    at the per-capita belief.
    """
    n = len(prefs)
    if n < 1:
        raise ParameterError("allocate needs at least one living agent")
    if len(ids) != n or len(set(ids)) != n:
        raise ParameterError("ids must be unique and match the agent list length")
    options = options or SimplexOptions()
    pop = _prepare(prefs, params.k_max, params.sigma_form)
    believed = _believed_hours(prev_labor, prev_total_labor, n, params.belief_floor)

    if kind in PLANNER_KINDS:
        labor = _solve_planner(
            kind,
            pop,
            params,
            prev_total_labor,
            options,
            stream,
            warm_start,
            use_warm_start,
            ids,
            believed,
        )
    elif kind is StrategyKind.S0:
        labor = _solve_own(pop, params, prev_total_labor, options, stream, ids)
    else:
        labor = _solve_min_myopic(pop, params, prev_total_labor, options, stream, ids, believed)

    cons, utils = _recorded(kind, labor, prefs, pop.fertility, params, prev_total_labor)
    if kind in MINIMUM_KINDS:
        objective = float(np.min(utils))
    else:
        objective = float(np.mean(utils))
    return AllocationResult(
        labor=labor,
        fertility=pop.fertility.copy(),
        consumptions=cons,
        utilities=utils,
        objective=objective,
    )


def _agent_stream(stream: RngStream | None, agent_id: int) -> RngStream | None:
    if stream is None:
        return None
    return stream.substream(agent_id)


def _believed_hours(
    prev_labor, prev_total_labor: float, n: int, floor: float
) -> np.ndarray:
    """Hours each agent is believed to repeat.

    Agents with no recorded hours (NaN entries) are imputed at the belief
    floor, the same level the founding generation bootstraps from; imputing
    at per-capita instead would make newcomers look overworked and miserable
    whenever mean labor is high, dragging the believed minimum down a little
    further every generation.
    """
    per_capita = belief_per_capita(prev_total_labor, n, floor)
    # a shrinking society can believe per-capita hours above the day; clamp so
    # believed leisure stays positive
    per_capita = min(per_capita, math.nextafter(DAY_HOURS, 0.0))
    if prev_labor is None:
        return np.full(n, per_capita)
    hours = np.asarray(prev_labor, dtype=float).copy()
    if hours.shape != (n,):
        raise ParameterError("prev_labor length must match the agent list")
    hours[np.isnan(hours)] = floor
    if np.any(hours < 0.0) or np.any(hours > DAY_HOURS):
        raise ParameterError("prev_labor entries must lie within the day")
    return np.clip(hours, math.nextafter(0.0, DAY_HOURS), math.nextafter(DAY_HOURS, 0.0))


def _solve_own(
    pop: _Population,
    params: SocietyParams,
    prev_total_labor: float,
    options: SimplexOptions,
    stream: RngStream | None,
    ids: list[int],
) -> np.ndarray:
    """S0: independent 1-d maximizations of own family utility."""
    n = pop.alphas.size
    others = myopic_others_labor(prev_total_labor, n, params.belief_floor)
    g1 = params.gamma - 1.0
    labor = np.empty(n)
    for i in range(n):
        alpha = pop.alphas[i]
        beta = pop.betas[i]
        bracket = pop.brackets[i]

        def evaluate(u, _a=alpha, _b=beta, _br=bracket):
            l = _transform_scalar(float(u[0]))
            c = l * math.pow(l + others, g1)
            return math.pow(DAY_HOURS - l, _a) * math.pow(c, _b) * _br

        u_best, _ = nelder_mead_max(evaluate, [0.0], options, _agent_stream(stream, ids[i]))
        labor[i] = _transform_scalar(float(u_best[0]))
    return labor


def _solve_min_myopic(
    pop: _Population,
    params: SocietyParams,
    prev_total_labor: float,
    options: SimplexOptions,
    stream: RngStream | None,
    ids: list[int],
    believed: np.ndarray,
) -> np.ndarray:
    """Sb: each agent picks own hours to maximize the society's lowest utility.

    Everyone else is believed to repeat `believed` hours, so the chooser's
    candidate hours shift the believed production total for all. The believed
    pool never drops below the society-wide belief floor.
    """
    n = pop.alphas.size
    g1 = params.gamma - 1.0
    # utility of a believed other j at total T factors as K_j * T^(g1*beta_j)
    scale = (
        np.power(DAY_HOURS - believed, pop.alphas)
        * np.power(believed, pop.betas)
        * pop.brackets
    )
    exponents = g1 * pop.betas
    believed_total = float(np.sum(believed))
    floor_base = params.belief_floor * (n - 1)
    labor = np.empty(n)
    for i in range(n):
        alpha = pop.alphas[i]
        beta = pop.betas[i]
        bracket = pop.brackets[i]
        base = max(believed_total - float(believed[i]), floor_base)

        def evaluate(u, _i=i, _a=alpha, _b=beta, _br=bracket, _base=base):
            l = _transform_scalar(float(u[0]))
            total = l + _base
            own = math.pow(DAY_HOURS - l, _a) * math.pow(l * math.pow(total, g1), _b) * _br
            if n == 1:
                return own
            others = scale * np.power(total, exponents)
            others[_i] = np.inf
            return min(own, float(others.min()))

        u_best, _ = nelder_mead_max(evaluate, [0.0], options, _agent_stream(stream, ids[i]))
        labor[i] = _transform_scalar(float(u_best[0]))
    return labor


def _solve_planner(
    kind: StrategyKind,
    pop: _Population,
    params: SocietyParams,
    prev_total_labor: float,
    options: SimplexOptions,
    stream: RngStream | None,
    warm_start,
    use_warm_start: bool,
    ids: list[int],
    believed: np.ndarray,
) -> np.ndarray:
    """SA / SAb: joint maximization over the full labor vector.

    Agents are solved in a canonical (alpha, sigma, id) order so the result is
    equivariant under permutations of the input list, then scattered back.
    """
    n = pop.alphas.size
    sigma_key = pop.brackets  # brackets are a strict function of (sigma, k(sigma))
    order = np.lexsort((np.asarray(ids), sigma_key, pop.alphas))
    alphas = pop.alphas[order]
    betas = pop.betas[order]
    brackets = pop.brackets[order]
    g1 = params.gamma - 1.0
    take_min = kind in MINIMUM_KINDS

    def labor_value(labor: np.ndarray) -> float:
        total = labor.sum()
        z = DAY_HOURS - labor
        utils = np.power(z, alphas) * np.power(labor * math.pow(total, g1), betas) * brackets
        return float(utils.min() if take_min else utils.mean())

    def evaluate(u: np.ndarray) -> float:
        return labor_value(bounded_transform(u))

    starts: list[np.ndarray] = []
    if warm_start is not None:
        given = np.asarray(warm_start, dtype=float)
        if given.shape != (n,):
            raise ParameterError("warm_start length must match the agent list")
        starts.append(inverse_transform(np.clip(given, 1e-9, DAY_HOURS - 1e-9))[order])
    if use_warm_start:
        own = _solve_own(pop, params, prev_total_labor, options, stream, ids)
        starts.append(inverse_transform(own)[order])
    if take_min:
        # the min objective is near-flat across profiles trading one agent's
        # hours against another's, and descent from an efficient start never
        # leaves the low-labor branch; seed the overworked branch explicitly
        crossing = _solve_min_myopic(pop, params, prev_total_labor, options, stream, ids, believed)
        starts.append(inverse_transform(crossing)[order])
        starts.append(inverse_transform(np.full(n, 20.0)))
    else:
        starts.append(np.zeros(n))  # independent cold start at 12 h for everyone

    objective = Objective(arity=n, evaluate=evaluate)
    best_u = None
    best_value = -np.inf
    for start in starts:
        u, value = maximize(objective, start, options, stream)
        if value > best_value:
            best_u, best_value = u, value
    labor_sorted = bounded_transform(best_u)
    labor = np.empty(n)
    labor[order] = labor_sorted
    return labor
