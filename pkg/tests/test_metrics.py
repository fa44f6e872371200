"""Outcome statistics: frozen examples, invariance properties, report wiring."""

import math
from dataclasses import dataclass, field

import numpy as np
import pytest
import scipy.stats
from hypothesis import given, settings
from hypothesis import strategies as st

from fairsoc.errors import ParameterError, UndefinedStatisticError
from fairsoc.metrics import (
    SocietySummary,
    build_report,
    coefficient_of_variation,
    count_recessions,
    format_report,
    growth_series,
    maybe_cv,
    maybe_skewness,
    mortality_rate,
    skewness,
    summarize_society,
)
from fairsoc.strategies import StrategyKind

from helpers import brute_force_recessions


@dataclass(frozen=True)
class _FakeRecord:
    population: int
    mean_consumption: float
    deaths: int = 0
    consumption_cv: float = 0.3
    mean_fertility: float = 0.5


@dataclass
class _FakeResult:
    index: int = 0
    strategy: StrategyKind = StrategyKind.S0
    gamma: float = 1.2
    records: list = field(default_factory=list)
    failed: bool = False
    capped: bool = False
    final_consumptions: np.ndarray = field(default_factory=lambda: np.array([1.0, 2.0, 3.0]))


def _series(*totals, population=10):
    return [_FakeRecord(population=population, mean_consumption=t / population) for t in totals]


class TestGrowthSeries:
    def test_constant_consumption_is_flat(self):
        growth = growth_series(_series(100.0, 100.0, 100.0))
        assert np.array_equal(growth, [0.0, 0.0])

    def test_table_granularity(self):
        growth = growth_series(_series(100.0, 102.5))
        assert growth[0] == pytest.approx(0.025)

    def test_zero_base_flagged_not_fatal(self):
        growth = growth_series(_series(100.0, 0.0, 50.0))
        assert growth[0] == -1.0
        assert math.isnan(growth[1])

    def test_single_record_yields_empty(self):
        assert growth_series(_series(100.0)).size == 0

    def test_population_change_counts_as_growth(self):
        # same per-capita consumption, doubled population
        records = [
            _FakeRecord(population=10, mean_consumption=5.0),
            _FakeRecord(population=20, mean_consumption=5.0),
        ]
        assert growth_series(records)[0] == pytest.approx(1.0)


class TestCountRecessions:
    def test_three_negatives_is_one_recession(self):
        assert count_recessions([-0.01, -0.02, -0.005]) == 1

    def test_broken_run_is_none(self):
        assert count_recessions([-0.01, -0.02, 0.005, -0.01]) == 0

    def test_two_separated_runs(self):
        assert count_recessions([-1, -1, -1, 0.1, -1, -1, -1, -1]) == 2

    def test_long_run_counts_once(self):
        assert count_recessions([-1.0] * 6) == 1

    def test_nan_breaks_a_run(self):
        assert count_recessions([-1, -1, math.nan, -1, -1]) == 0

    def test_trailing_non_negative_is_inert(self):
        base = [-1, -1, -1, 0.5, -1, -1, -1]
        assert count_recessions(base + [0.0]) == count_recessions(base)
        assert count_recessions(base + [2.0]) == count_recessions(base)

    def test_min_length_validation(self):
        with pytest.raises(ParameterError):
            count_recessions([-1.0], min_length=0)

    @settings(max_examples=200, deadline=None)
    @given(
        st.lists(
            st.floats(min_value=-1.0, max_value=1.0, allow_nan=False), min_size=0, max_size=40
        )
    )
    def test_matches_independent_scanner(self, growth):
        assert count_recessions(growth) == brute_force_recessions(growth)


class TestCoefficientOfVariation:
    def test_equal_values_zero(self):
        assert coefficient_of_variation([4.0, 4.0, 4.0]) == 0.0

    def test_two_point_example(self):
        assert coefficient_of_variation([1.0, 3.0]) == pytest.approx(0.5)

    def test_four_point_example(self):
        # population sd sqrt(1.25) over mean 2.5
        assert coefficient_of_variation([1, 2, 3, 4]) == pytest.approx(
            math.sqrt(1.25) / 2.5, rel=1e-15
        )

    def test_undefined_cases(self):
        with pytest.raises(UndefinedStatisticError):
            coefficient_of_variation([5.0])
        with pytest.raises(UndefinedStatisticError):
            coefficient_of_variation([1.0, -1.0])
        assert math.isnan(maybe_cv([5.0]))

    @settings(max_examples=100, deadline=None)
    @given(
        values=st.lists(st.floats(min_value=0.1, max_value=100.0), min_size=2, max_size=30),
        scale=st.floats(min_value=0.01, max_value=1000.0),
    )
    def test_scale_invariance(self, values, scale):
        base = coefficient_of_variation(values)
        scaled = coefficient_of_variation([scale * v for v in values])
        assert scaled == pytest.approx(base, rel=1e-12)


class TestSkewness:
    def test_symmetric_sample(self):
        assert skewness([1.0, 2.0, 3.0]) == pytest.approx(0.0, abs=1e-15)

    def test_right_tail_positive(self):
        assert skewness([1.0, 1.0, 1.0, 10.0]) > 0.0

    def test_frozen_moment_example(self):
        # mean 0.2, population sd 0.4, third central moment 0.096
        assert skewness([0, 0, 0, 0, 1]) == pytest.approx(1.5, rel=1e-15)

    def test_matches_reference_implementation(self):
        rng = np.random.default_rng(5)
        sample = rng.lognormal(0.0, 0.8, size=500)
        assert skewness(sample) == pytest.approx(
            float(scipy.stats.skew(sample, bias=True)), rel=1e-10
        )

    def test_undefined_cases(self):
        with pytest.raises(UndefinedStatisticError):
            skewness([1.0, 1.0, 1.0])
        with pytest.raises(UndefinedStatisticError):
            skewness([1.0, 2.0])
        assert math.isnan(maybe_skewness([1.0, 1.0, 1.0]))

    @settings(max_examples=100, deadline=None)
    @given(
        values=st.lists(
            st.floats(min_value=-50.0, max_value=50.0), min_size=3, max_size=30
        ).filter(lambda v: float(np.var(v)) > 1e-12),
        shift=st.floats(min_value=-100.0, max_value=100.0),
        scale=st.floats(min_value=0.01, max_value=100.0),
    )
    def test_affine_invariance(self, values, shift, scale):
        base = skewness(values)
        moved = skewness([scale * v + shift for v in values])
        assert moved == pytest.approx(base, rel=1e-9, abs=1e-9)


class TestMortalityRate:
    def _summary(self, deaths, exposure):
        return SocietySummary(
            society_index=0,
            strategy=StrategyKind.S0,
            generations_completed=max(1, exposure // 10),
            failed=False,
            capped=False,
            mean_growth=0.0,
            recession_count=0,
            total_deaths=deaths,
            total_agent_generations=exposure,
            mean_cv=0.3,
            final_consumption_sample=np.array([1.0, 2.0, 3.0]),
        )

    def test_simple_ratio(self):
        assert mortality_rate(self._summary(10, 1000)) == pytest.approx(0.01)

    def test_no_deaths(self):
        assert mortality_rate(self._summary(0, 500)) == 0.0

    def test_zero_exposure_undefined(self):
        with pytest.raises(UndefinedStatisticError):
            mortality_rate(self._summary(0, 0))

    def test_deaths_beyond_exposure_impossible(self):
        with pytest.raises(ParameterError):
            self._summary(11, 10)


class TestSummarize:
    def test_fields_travel_through(self):
        records = [
            _FakeRecord(population=10, mean_consumption=5.0, deaths=1, consumption_cv=0.2),
            _FakeRecord(population=12, mean_consumption=5.5, deaths=2, consumption_cv=0.4),
        ]
        result = _FakeResult(index=3, records=records, final_consumptions=np.array([1.0, 5.0, 6.0]))
        summary = summarize_society(result)
        assert summary.society_index == 3
        assert summary.generations_completed == 2
        assert summary.total_deaths == 3
        assert summary.total_agent_generations == 22
        assert summary.mean_cv == pytest.approx(0.3)
        assert mortality_rate(summary) == pytest.approx(3 / 22)

    def test_nan_cv_rows_do_not_poison_mean(self):
        records = [
            _FakeRecord(population=10, mean_consumption=5.0, consumption_cv=0.2),
            _FakeRecord(population=1, mean_consumption=5.0, consumption_cv=math.nan),
        ]
        summary = summarize_society(_FakeResult(records=records))
        assert summary.mean_cv == pytest.approx(0.2)


class TestBuildReport:
    def _result(self, token, index, *, deaths=1, cv=0.3, failed=False, growth_step=1.05):
        kind = StrategyKind.from_token(token)
        records = []
        total = 100.0
        for _ in range(4):
            records.append(
                _FakeRecord(
                    population=10,
                    mean_consumption=total / 10,
                    deaths=deaths,
                    consumption_cv=cv,
                )
            )
            total *= growth_step
        return _FakeResult(index=index, strategy=kind, records=records, failed=failed)

    def test_baseline_reads_exactly_100(self):
        report = build_report({"0": [self._result("0", i) for i in range(3)]})
        row = report.rows["0"]
        assert row.mortality_index_pct == 100.0
        assert row.cv_index_pct == 100.0
        assert row.failed_pct == 0.0

    def test_doubled_mortality_reads_200(self):
        data = {
            "0": [self._result("0", 0, deaths=1)],
            "b": [self._result("b", 0, deaths=2)],
        }
        report = build_report(data)
        assert report.rows["b"].mortality_index_pct == pytest.approx(200.0)

    def test_failed_share(self):
        results = [self._result("0", i, failed=(i < 29)) for i in range(100)]
        report = build_report({"0": results})
        assert report.rows["0"].failed_pct == pytest.approx(29.0)

    def test_failed_societies_excluded_from_level_means(self):
        healthy = self._result("0", 0, cv=0.2, growth_step=1.1)
        sick = self._result("0", 1, cv=0.9, growth_step=0.5, failed=True)
        report = build_report({"0": [healthy, sick]})
        assert report.rows["0"].mean_cv == pytest.approx(0.2)
        assert report.rows["0"].growth_pct == pytest.approx(10.0, rel=1e-9)

    def test_recession_frequency_pools_generations(self):
        shrinking = self._result("0", 0, growth_step=0.9)  # 3 negative steps: 1 recession
        flat = self._result("0", 1, growth_step=1.0)
        report = build_report({"0": [shrinking, flat]})
        # one recession over 8 pooled generations
        assert report.rows["0"].recession_frequency_pct == pytest.approx(100.0 / 8.0)

    def test_missing_baseline_rejected(self):
        with pytest.raises(ParameterError):
            build_report({"A": [self._result("A", 0)]})

    def test_permutation_invariance(self):
        results = [self._result("0", i, deaths=1 + i % 3) for i in range(6)]
        a = build_report({"0": results})
        b = build_report({"0": list(reversed(results))})
        assert a.rows["0"] == b.rows["0"]

    def test_metadata_travels(self):
        report = build_report(
            {"0": [self._result("0", 0)]}, metadata={"seed": "42", "config_digest": "abc"}
        )
        assert report.metadata["seed"] == "42"
        text = format_report(report)
        assert "seed: 42" in text

    def test_undefined_marked_not_nan(self):
        # all societies failed: growth and CV means are undefined
        results = [self._result("0", i, failed=True) for i in range(2)]
        report = build_report({"0": results})
        text = format_report(report)
        assert "undefined" in text
        assert "nan" not in text
