"""Generational dynamics: founding, mating, reproduction, mortality.

One generation runs in a fixed order: allocate labor, accumulate it, record
cross-section statistics, pair the living assortatively, reproduce, apply
mortality to the parents, then append the children so they enter the economy
next generation. An agent may reproduce and die in the same generation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .economy import Preferences, mortality
from .errors import InvariantViolation, ParameterError, StateError
from .metrics import maybe_cv, maybe_skewness
from .optimizer import SimplexOptions
from .stochastics import (
    Purpose,
    RngStream,
    bernoulli,
    derive_stream,
    exponential,
    gaussian,
    poisson,
    uniform01,
)
from .strategies import SocietyParams, StrategyKind, allocate

ALPHA_CLAMP = (0.01, 0.99)
SIGMA_CLAMP = (0.0, 0.99)


@dataclass
class Agent:
    id: int
    prefs: Preferences
    birth_generation: int
    cumulative_labor: float = 0.0
    alive: bool = True
    last_labor: float = math.nan  # NaN until the agent's first working generation


@dataclass(frozen=True)
class StreamBundle:
    """One independent stream per purpose for a single society."""

    founding: RngStream
    optimizer: RngStream
    mating: RngStream  # reserved; greedy pairing needs no draws
    reproduction: RngStream
    mutation: RngStream
    mortality: RngStream


def bundle_streams(master_seed: int, strategy: StrategyKind, society_index: int) -> StreamBundle:
    def derive(purpose: Purpose) -> RngStream:
        return derive_stream(master_seed, int(strategy), society_index, int(purpose))

    return StreamBundle(
        founding=derive(Purpose.FOUNDING),
        optimizer=derive(Purpose.OPTIMIZER),
        mating=derive(Purpose.MATING),
        reproduction=derive(Purpose.REPRODUCTION),
        mutation=derive(Purpose.MUTATION),
        mortality=derive(Purpose.MORTALITY),
    )


@dataclass(frozen=True)
class EvolutionSettings:
    mutation_sd: float = 0.02
    mortality_mid: float = 240.0
    mortality_scale: float = 60.0
    population_cap: int = 5000
    warm_start: bool = True

    def __post_init__(self) -> None:
        if not self.mutation_sd >= 0.0:
            raise ParameterError(f"mutation_sd must be >= 0, got {self.mutation_sd}")
        if not self.mortality_scale > 0.0:
            raise ParameterError(f"mortality_scale must be > 0, got {self.mortality_scale}")
        if self.population_cap < 2:
            raise ParameterError(f"population_cap must be >= 2, got {self.population_cap}")


@dataclass
class Society:
    index: int
    strategy: StrategyKind
    params: SocietyParams
    agents: list[Agent]
    streams: StreamBundle
    prev_total_labor: float
    next_id: int
    generation: int = 0
    failed: bool = False
    capped: bool = False
    last_consumptions: np.ndarray | None = None
    expected_living: set[int] | None = None


@dataclass(frozen=True)
class GenerationRecord:
    generation: int
    population: int
    births: int
    deaths: int
    total_labor: float
    total_output: float
    mean_consumption: float
    consumption_cv: float
    consumption_skewness: float
    min_utility: float
    mean_utility: float
    mean_fertility: float


@dataclass(frozen=True)
class SocietyResult:
    index: int
    strategy: StrategyKind
    gamma: float
    records: list[GenerationRecord]
    failed: bool
    capped: bool
    final_consumptions: np.ndarray


def _clamp(value: float, bounds: tuple[float, float]) -> float:
    return min(max(value, bounds[0]), bounds[1])


def found_society(
    strategy: StrategyKind,
    society_index: int,
    master_seed: int,
    initial_population: int,
    gamma_rate: float = 1.0,
    k_max: int = 10,
    belief_floor: float = 12.0,
    sigma_form: str = "geometric",
) -> Society:
    """Draw a fresh society: gamma first, then (alpha, sigma) per founder.

    Founders bootstrap the belief machinery as if everyone had just worked the
    floor hours, so generation 0 sees a sensible exogenous labor supply.
    """
    if initial_population < 2:
        raise ParameterError(f"initial_population must be >= 2, got {initial_population}")
    streams = bundle_streams(master_seed, strategy, society_index)
    gamma = 1.0 + exponential(streams.founding, gamma_rate)
    params = SocietyParams(
        gamma=gamma, k_max=k_max, belief_floor=belief_floor, sigma_form=sigma_form
    )
    agents = []
    for i in range(initial_population):
        alpha = _clamp(uniform01(streams.founding), ALPHA_CLAMP)
        sigma = _clamp(uniform01(streams.founding), SIGMA_CLAMP)
        agents.append(Agent(id=i, prefs=Preferences(alpha=alpha, sigma=sigma), birth_generation=0))
    return Society(
        index=society_index,
        strategy=strategy,
        params=params,
        agents=agents,
        streams=streams,
        prev_total_labor=belief_floor * initial_population,
        next_id=initial_population,
    )


def mate_pairs(agents: list[Agent]) -> list[tuple[Agent, Agent]]:
    """Greedy disjoint pairing by Euclidean distance in (alpha, sigma) space.

    Repeatedly take the closest unpaired pair; distance ties resolve toward
    the pair with the lower ids. One agent stays unpaired when the count is
    odd.
    """
    n = len(agents)
    if n < 2:
        return []
    alphas = np.array([a.prefs.alpha for a in agents])
    sigmas = np.array([a.prefs.sigma for a in agents])
    ids = np.array([a.id for a in agents])
    iu, ju = np.triu_indices(n, k=1)
    d2 = (alphas[iu] - alphas[ju]) ** 2 + (sigmas[iu] - sigmas[ju]) ** 2
    id_a = ids[iu]
    id_b = ids[ju]
    lo = np.minimum(id_a, id_b)
    hi = np.maximum(id_a, id_b)
    order = np.lexsort((hi, lo, d2))
    used = np.zeros(n, dtype=bool)
    pairs: list[tuple[Agent, Agent]] = []
    wanted = n // 2
    for idx in order:
        a, b = int(iu[idx]), int(ju[idx])
        if used[a] or used[b]:
            continue
        used[a] = used[b] = True
        pairs.append((agents[a], agents[b]))
        if len(pairs) == wanted:
            break
    return pairs


def reproduce(
    parent_a: Agent,
    parent_b: Agent,
    fertility_a: int,
    fertility_b: int,
    child_generation: int,
    id_start: int,
    reproduction_stream: RngStream,
    mutation_stream: RngStream,
    mutation_sd: float,
) -> list[Agent]:
    """Poisson((k_a + k_b)/2) children around the parents' mean preferences.

    Draw order per pair: one Poisson count, then per child a Gaussian for
    alpha and one for sigma. Children start with zero lifetime labor.
    """
    mean_k = (fertility_a + fertility_b) / 2.0
    count = poisson(reproduction_stream, mean_k)
    mid_alpha = (parent_a.prefs.alpha + parent_b.prefs.alpha) / 2.0
    mid_sigma = (parent_a.prefs.sigma + parent_b.prefs.sigma) / 2.0
    children = []
    for offset in range(count):
        alpha = _clamp(gaussian(mutation_stream, mid_alpha, mutation_sd), ALPHA_CLAMP)
        sigma = _clamp(gaussian(mutation_stream, mid_sigma, mutation_sd), SIGMA_CLAMP)
        children.append(
            Agent(
                id=id_start + offset,
                prefs=Preferences(alpha=alpha, sigma=sigma),
                birth_generation=child_generation,
            )
        )
    return children


def step_generation(
    society: Society,
    options: SimplexOptions | None = None,
    settings: EvolutionSettings | None = None,
) -> GenerationRecord:
    """Advance the society by one generation and return its record."""
    settings = settings or EvolutionSettings()
    if society.failed:
        raise StateError(f"society {society.index} already failed; cannot step")
    living = [a for a in society.agents if a.alive]
    n = len(living)
    if n < 2:
        raise StateError(f"society {society.index} has {n} living agents; cannot step")
    ids = [a.id for a in living]
    if society.expected_living is not None and set(ids) != society.expected_living:
        raise InvariantViolation(
            f"society {society.index}: living roster changed outside step_generation"
        )

    prefs = [a.prefs for a in living]
    gen_stream = society.streams.optimizer.substream(society.generation)
    result = allocate(
        society.strategy,
        prefs,
        ids,
        society.params,
        society.prev_total_labor,
        options,
        gen_stream,
        use_warm_start=settings.warm_start,
        prev_labor=[a.last_labor for a in living],
    )

    for agent, hours in zip(living, result.labor):
        agent.cumulative_labor += float(hours)
        agent.last_labor = float(hours)
    total_labor = float(np.sum(result.labor))

    cons = result.consumptions
    record_stats = dict(
        total_labor=total_labor,
        total_output=math.pow(total_labor, society.params.gamma),
        mean_consumption=float(np.mean(cons)),
        consumption_cv=maybe_cv(cons),
        consumption_skewness=maybe_skewness(cons),
        min_utility=float(np.min(result.utilities)),
        mean_utility=float(np.mean(result.utilities)),
        mean_fertility=float(np.mean(result.fertility)),
    )

    fertility_by_id = {a.id: int(k) for a, k in zip(living, result.fertility)}
    pairs = mate_pairs(living)
    children: list[Agent] = []
    for parent_a, parent_b in pairs:
        children.extend(
            reproduce(
                parent_a,
                parent_b,
                fertility_by_id[parent_a.id],
                fertility_by_id[parent_b.id],
                child_generation=society.generation + 1,
                id_start=society.next_id + len(children),
                reproduction_stream=society.streams.reproduction,
                mutation_stream=society.streams.mutation,
                mutation_sd=settings.mutation_sd,
            )
        )
    births = len(children)

    deaths = 0
    for agent in living:
        p = mortality(agent.cumulative_labor, settings.mortality_mid, settings.mortality_scale)
        if bernoulli(society.streams.mortality, p):
            agent.alive = False
            deaths += 1

    society.agents.extend(children)
    society.next_id += births

    survivors = [a for a in living if a.alive]
    if len(survivors) + deaths != n:
        raise InvariantViolation(
            f"society {society.index}: {n} agents split into "
            f"{len(survivors)} survivors + {deaths} deaths"
        )
    if any(not child.alive or child.cumulative_labor != 0.0 for child in children):
        raise InvariantViolation(f"society {society.index}: malformed newborn state")

    record = GenerationRecord(
        generation=society.generation,
        population=n,
        births=births,
        deaths=deaths,
        **record_stats,
    )
    society.generation += 1
    society.prev_total_labor = total_labor
    society.last_consumptions = np.array(cons, copy=True)
    society.expected_living = {a.id for a in survivors} | {c.id for c in children}
    if len(society.expected_living) < 2:
        society.failed = True
    return record


def run_society(
    society: Society,
    generations: int,
    options: SimplexOptions | None = None,
    settings: EvolutionSettings | None = None,
) -> SocietyResult:
    """Run up to `generations` steps; stop early on failure or population cap."""
    settings = settings or EvolutionSettings()
    if generations < 1:
        raise ParameterError(f"generations must be >= 1, got {generations}")
    records: list[GenerationRecord] = []
    for _ in range(generations):
        living = sum(1 for a in society.agents if a.alive)
        if living > settings.population_cap:
            society.capped = True
            break
        if living < 2:
            break
        records.append(step_generation(society, options, settings))
        if society.failed:
            break
    if not records:
        raise StateError(f"society {society.index} produced no generations")
    return SocietyResult(
        index=society.index,
        strategy=society.strategy,
        gamma=society.params.gamma,
        records=records,
        failed=society.failed,
        capped=society.capped,
        final_consumptions=np.array(society.last_consumptions, copy=True),
    )
