"""Outcome statistics for single societies and cross-strategy comparisons.

Growth is measured on total consumption (population times mean consumption),
so it reflects both per-capita welfare and demography. Dispersion statistics
use population conventions: divide by n, not n - 1. Cross-strategy indices
are expressed relative to the baseline strategy, which reads exactly 100.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .errors import ParameterError, UndefinedStatisticError
from .strategies import StrategyKind

BASELINE_TOKEN = "0"
RECESSION_MIN_LENGTH = 3


def coefficient_of_variation(values: Sequence[float] | np.ndarray) -> float:
    """Population CV: sqrt(mean((x - m)^2)) / m. Undefined when m <= 0."""
    arr = np.asarray(values, dtype=float)
    if arr.size < 2:
        raise UndefinedStatisticError("coefficient of variation needs at least two values")
    mean = float(np.mean(arr))
    if mean <= 0.0:
        raise UndefinedStatisticError("coefficient of variation with non-positive mean")
    return float(np.sqrt(np.mean((arr - mean) ** 2)) / mean)


def skewness(values: Sequence[float] | np.ndarray) -> float:
    """Population skewness: m3 / m2^(3/2). Undefined when the variance is 0."""
    arr = np.asarray(values, dtype=float)
    if arr.size < 3:
        raise UndefinedStatisticError("skewness needs at least three values")
    mean = float(np.mean(arr))
    centered = arr - mean
    m2 = float(np.mean(centered**2))
    if m2 == 0.0:
        raise UndefinedStatisticError("skewness of a constant sample")
    m3 = float(np.mean(centered**3))
    return m3 / m2**1.5


def maybe_cv(values: Sequence[float] | np.ndarray) -> float:
    """CV, or NaN where it is undefined. For per-generation bookkeeping."""
    try:
        return coefficient_of_variation(values)
    except UndefinedStatisticError:
        return math.nan


def maybe_skewness(values: Sequence[float] | np.ndarray) -> float:
    try:
        return skewness(values)
    except UndefinedStatisticError:
        return math.nan


def growth_series(records: Sequence) -> np.ndarray:
    """Per-generation growth of total consumption.

    Entry t is (C_{t+1} - C_t) / C_t with C = population * mean_consumption.
    Ratios against a zero or non-finite base are NaN rather than an error; a
    collapsed generation should show up as a gap, not kill the analysis.
    """
    totals = np.array([r.population * r.mean_consumption for r in records], dtype=float)
    if totals.size < 2:
        return np.empty(0, dtype=float)
    prev = totals[:-1]
    nxt = totals[1:]
    out = np.full(prev.shape, math.nan)
    ok = np.isfinite(prev) & np.isfinite(nxt) & (prev != 0.0)
    out[ok] = (nxt[ok] - prev[ok]) / prev[ok]
    return out


def count_recessions(
    growth: Sequence[float] | np.ndarray, min_length: int = RECESSION_MIN_LENGTH
) -> int:
    """Count maximal runs of at least `min_length` consecutive negative entries.

    NaN entries break a run. A run of six negatives is one recession, not two.
    """
    if min_length < 1:
        raise ParameterError(f"min_length must be >= 1, got {min_length}")
    count = 0
    run = 0
    for g in np.asarray(growth, dtype=float):
        if g < 0.0:
            run += 1
        else:
            if run >= min_length:
                count += 1
            run = 0
    if run >= min_length:
        count += 1
    return count


@dataclass(frozen=True)
class SocietySummary:
    """One society's run collapsed to the scalar outcomes the report compares."""

    society_index: int
    strategy: StrategyKind
    generations_completed: int
    failed: bool
    capped: bool
    mean_growth: float
    recession_count: int
    total_deaths: int
    total_agent_generations: int
    mean_cv: float
    final_consumption_sample: np.ndarray
    gamma: float = math.nan
    final_skewness: float = math.nan
    mean_fertility: float = math.nan

    def __post_init__(self) -> None:
        if self.generations_completed < 1:
            raise ParameterError("a summary needs at least one completed generation")
        if self.recession_count < 0:
            raise ParameterError("recession_count must be >= 0")
        if self.total_deaths > self.total_agent_generations:
            raise ParameterError("deaths cannot exceed agent-generations of exposure")


def mortality_rate(summary: SocietySummary) -> float:
    """Deaths per agent-generation over a society's whole run."""
    if summary.total_agent_generations <= 0:
        raise UndefinedStatisticError("mortality rate with no agent-generations")
    return summary.total_deaths / summary.total_agent_generations


def _nanmean(values: Sequence[float] | np.ndarray) -> float:
    arr = np.asarray(values, dtype=float)
    finite = arr[np.isfinite(arr)]
    if finite.size == 0:
        return math.nan
    # fsum is exact, which keeps report aggregation permutation-invariant
    return math.fsum(finite) / finite.size


def summarize_society(result) -> SocietySummary:
    """Collapse one society's result into a SocietySummary."""
    records = result.records
    growth = growth_series(records)
    return SocietySummary(
        society_index=result.index,
        strategy=result.strategy,
        generations_completed=len(records),
        failed=result.failed,
        capped=result.capped,
        mean_growth=_nanmean(growth),
        recession_count=count_recessions(growth),
        total_deaths=sum(r.deaths for r in records),
        total_agent_generations=sum(r.population for r in records),
        mean_cv=_nanmean([r.consumption_cv for r in records]),
        final_consumption_sample=np.asarray(result.final_consumptions, dtype=float),
        gamma=result.gamma,
        final_skewness=maybe_skewness(result.final_consumptions),
        mean_fertility=_nanmean([r.mean_fertility for r in records]),
    )


@dataclass(frozen=True)
class StrategyReportRow:
    """One strategy's line of the cross-strategy report.

    Absolute diagnostics (mortality_rate, mean_cv, mean_skewness) ride along
    with the indexed percentages so a report stays interpretable on its own.
    """

    strategy: str
    societies: int
    failed: int
    capped: int
    growth_pct: float
    recession_frequency_pct: float
    mortality_rate: float
    mortality_index_pct: float
    mean_cv: float
    cv_index_pct: float
    mean_skewness: float
    failed_pct: float


@dataclass(frozen=True)
class ExperimentReport:
    baseline: str
    rows: Mapping[str, StrategyReportRow]
    metadata: Mapping[str, str] = field(default_factory=dict)


@dataclass(frozen=True)
class _StrategyPool:
    token: str
    societies: int
    failed: int
    capped: int
    mean_growth: float
    recessions_per_generation: float
    mean_mortality: float
    mean_cv: float
    mean_skewness: float

    @classmethod
    def from_summaries(cls, token: str, summaries: Sequence[SocietySummary]) -> "_StrategyPool":
        if not summaries:
            raise ParameterError(f"strategy {token!r} has no societies to aggregate")
        surviving = [s for s in summaries if not s.failed]
        generations = sum(s.generations_completed for s in summaries)
        recessions = sum(s.recession_count for s in summaries)
        return cls(
            token=token,
            societies=len(summaries),
            failed=sum(s.failed for s in summaries),
            capped=sum(s.capped for s in summaries),
            # failed societies' truncated series would bias the level means,
            # so growth and CV average over surviving societies only
            mean_growth=_nanmean([s.mean_growth for s in surviving]),
            recessions_per_generation=recessions / generations if generations else math.nan,
            mean_mortality=_nanmean([mortality_rate(s) for s in summaries]),
            mean_cv=_nanmean([s.mean_cv for s in surviving]),
            mean_skewness=_nanmean([s.final_skewness for s in summaries]),
        )


def _indexed(value: float, reference: float) -> float:
    if math.isfinite(reference) and reference != 0.0 and math.isfinite(value):
        return 100.0 * value / reference
    return math.nan


def build_report(
    results_by_strategy: Mapping[str, Sequence],
    metadata: Mapping[str, str] | None = None,
) -> ExperimentReport:
    """Aggregate each strategy and index mortality and CV against the baseline.

    The baseline strategy's own indices read exactly 100 by construction.
    Undefined quantities (for instance an index against a zero baseline) are
    NaN in the dataclass; renderers must mark them explicitly.
    """
    if BASELINE_TOKEN not in results_by_strategy:
        raise ParameterError(
            f"report needs baseline strategy {BASELINE_TOKEN!r}; "
            f"got {sorted(results_by_strategy)}"
        )
    pools: dict[str, _StrategyPool] = {}
    for token, results in results_by_strategy.items():
        summaries = [summarize_society(r) for r in results]
        pools[token] = _StrategyPool.from_summaries(token, summaries)
    base = pools[BASELINE_TOKEN]
    rows: dict[str, StrategyReportRow] = {}
    for token, pool in pools.items():
        rows[token] = StrategyReportRow(
            strategy=token,
            societies=pool.societies,
            failed=pool.failed,
            capped=pool.capped,
            growth_pct=100.0 * pool.mean_growth,
            recession_frequency_pct=100.0 * pool.recessions_per_generation,
            mortality_rate=pool.mean_mortality,
            mortality_index_pct=_indexed(pool.mean_mortality, base.mean_mortality),
            mean_cv=pool.mean_cv,
            cv_index_pct=_indexed(pool.mean_cv, base.mean_cv),
            mean_skewness=pool.mean_skewness,
            failed_pct=100.0 * pool.failed / pool.societies,
        )
    return ExperimentReport(baseline=BASELINE_TOKEN, rows=rows, metadata=dict(metadata or {}))


def _cell(value: float, width: int, decimals: int) -> str:
    if not math.isfinite(value):
        return f"{'undefined':>{width}}"
    return f"{value:>{width}.{decimals}f}"


def format_report(report: ExperimentReport) -> str:
    """Fixed-width text table, one strategy per row."""
    headers = [
        ("strategy", 9),
        ("societies", 9),
        ("growth%", 10),
        ("recess%", 10),
        ("mort idx%", 10),
        ("cv idx%", 10),
        ("failed%", 10),
        ("skew", 10),
    ]
    lines = ["  ".join(f"{h:>{w}}" for h, w in headers)]
    for token in sorted(report.rows):
        row = report.rows[token]
        cells = [
            f"{('S' + token):>9}",
            f"{row.societies:>9d}",
            _cell(row.growth_pct, 10, 2),
            _cell(row.recession_frequency_pct, 10, 2),
            _cell(row.mortality_index_pct, 10, 1),
            _cell(row.cv_index_pct, 10, 1),
            _cell(row.failed_pct, 10, 1),
            _cell(row.mean_skewness, 10, 3),
        ]
        lines.append("  ".join(cells))
    if report.metadata:
        lines.append("")
        for key in sorted(report.metadata):
            lines.append(f"{key}: {report.metadata[key]}")
    return "\n".join(lines)
