"""Allocation strategies: closed forms, accounting routes, dominance, beliefs."""

import numpy as np
import pytest

from fairsoc.economy import DAY_HOURS, Preferences, choose_k
from fairsoc.errors import ParameterError
from fairsoc.optimizer import SimplexOptions
from fairsoc.stochastics import derive_stream
from fairsoc.strategies import (
    AllocationResult,
    SocietyParams,
    StrategyKind,
    allocate,
    belief_per_capita,
    myopic_others_labor,
    objective_value,
)

TIGHT = SimplexOptions(max_iterations=3000, tolerance=1e-10, restarts=2)


def _prefs(*pairs):
    return [Preferences(alpha=a, sigma=s) for a, s in pairs]


def _stream(tag):
    return derive_stream(0, 888, tag, 0)


class TestBeliefs:
    def test_per_capita_floor_engages(self):
        assert belief_per_capita(100.0, 10) == 12.0

    def test_per_capita_above_floor(self):
        assert belief_per_capita(200.0, 10) == 20.0

    def test_others_labor_identity(self):
        # (n-1) believed shares, never a near-empty economy
        for ptl, n in [(0.0, 5), (30.0, 5), (500.0, 5), (500.0, 1)]:
            expected = (n - 1) * max(ptl / n, 12.0)
            assert myopic_others_labor(ptl, n) == expected

    def test_rejects_empty_roster(self):
        with pytest.raises(ParameterError):
            belief_per_capita(10.0, 0)

    def test_rejects_negative_labor(self):
        with pytest.raises(ParameterError):
            belief_per_capita(-1.0, 4)


class TestOwnChoice:
    def test_vast_outside_labor_recovers_time_shares(self):
        # with the production term inert, labor converges to 24 * beta
        alphas = [0.2, 0.4, 0.5, 0.7, 0.9]
        prefs = _prefs(*[(a, 0.3) for a in alphas])
        params = SocietyParams(gamma=1.2)
        result = allocate(
            StrategyKind.S0, prefs, list(range(len(prefs))), params, 1e6, TIGHT, _stream(1)
        )
        for a, labor in zip(alphas, result.labor):
            assert labor == pytest.approx(24.0 * (1.0 - a), abs=0.02)

    def test_myopic_consumption_accounting(self):
        prefs = _prefs((0.3, 0.2), (0.6, 0.8))
        params = SocietyParams(gamma=1.3)
        ptl = 40.0
        result = allocate(StrategyKind.S0, prefs, [0, 1], params, ptl, TIGHT, _stream(2))
        others = myopic_others_labor(ptl, 2, params.belief_floor)
        expected = result.labor * (result.labor + others) ** (params.gamma - 1.0)
        assert np.allclose(result.consumptions, expected, rtol=1e-12)

    def test_utilities_carry_fertility_brackets(self):
        prefs = _prefs((0.4, 0.9), (0.4, 0.1))
        params = SocietyParams(gamma=1.2)
        result = allocate(StrategyKind.S0, prefs, [0, 1], params, 60.0, TIGHT, _stream(3))
        for i, p in enumerate(prefs):
            k = result.fertility[i]
            assert k == choose_k(p, params.k_max)
            bracket = 1.0 / (k + 1) + sum(p.sigma**j for j in range(1, k + 1))
            base = (DAY_HOURS - result.labor[i]) ** p.alpha * result.consumptions[i] ** (
                1.0 - p.alpha
            )
            assert result.utilities[i] == pytest.approx(bracket * base, rel=1e-12)


class TestPlannerAccounting:
    @pytest.mark.parametrize("kind", [StrategyKind.SA, StrategyKind.SAB])
    def test_self_consistent_consumption(self, kind):
        prefs = _prefs((0.3, 0.4), (0.5, 0.6), (0.7, 0.2))
        params = SocietyParams(gamma=1.4)
        result = allocate(kind, prefs, [0, 1, 2], params, 36.0, TIGHT, _stream(4))
        total = result.labor.sum()
        expected = result.labor * total ** (params.gamma - 1.0)
        assert np.allclose(result.consumptions, expected, rtol=1e-12)

    def test_objective_matches_recorded(self):
        prefs = _prefs((0.35, 0.5), (0.55, 0.7), (0.75, 0.3), (0.25, 0.9))
        params = SocietyParams(gamma=1.25)
        for kind in StrategyKind:
            result = allocate(kind, prefs, [0, 1, 2, 3], params, 48.0, TIGHT, _stream(5))
            recomputed = objective_value(kind, result.labor, prefs, params, 48.0)
            assert result.objective == pytest.approx(recomputed, rel=1e-12)


class TestDominance:
    """Planner strategies cannot do worse on their own objective."""

    def _society(self, tag):
        stream = _stream(100 + tag)
        prefs = [
            Preferences(
                alpha=0.05 + 0.9 * stream.generator.random(),
                sigma=0.99 * stream.generator.random(),
            )
            for _ in range(8)
        ]
        return prefs, SocietyParams(gamma=1.0 + 0.4 * stream.generator.random())

    @pytest.mark.parametrize("tag", range(4))
    def test_planner_mean_beats_own_choice(self, tag):
        prefs, params = self._society(tag)
        ids = list(range(len(prefs)))
        s0 = allocate(StrategyKind.S0, prefs, ids, params, 96.0, TIGHT, _stream(6))
        sa = allocate(
            StrategyKind.SA, prefs, ids, params, 96.0, TIGHT, _stream(7), warm_start=s0.labor
        )
        s0_mean = objective_value(StrategyKind.SA, s0.labor, prefs, params, 96.0)
        assert sa.objective >= s0_mean - 1e-9

    @pytest.mark.parametrize("tag", range(4))
    def test_planner_min_beats_mean_planner(self, tag):
        prefs, params = self._society(tag + 50)
        ids = list(range(len(prefs)))
        sa = allocate(StrategyKind.SA, prefs, ids, params, 96.0, TIGHT, _stream(8))
        sab = allocate(
            StrategyKind.SAB, prefs, ids, params, 96.0, TIGHT, _stream(9), warm_start=sa.labor
        )
        sa_min = objective_value(StrategyKind.SAB, sa.labor, prefs, params, 96.0)
        assert sab.objective >= sa_min - 1e-9

    def test_warm_start_is_a_floor(self):
        prefs, params = self._society(99)
        ids = list(range(len(prefs)))
        warm = np.full(len(prefs), 10.0)
        result = allocate(
            StrategyKind.SAB, prefs, ids, params, 96.0, TIGHT, _stream(10), warm_start=warm
        )
        floor = objective_value(StrategyKind.SAB, warm, prefs, params, 96.0)
        assert result.objective >= floor - 1e-9


class TestEquivariance:
    @pytest.mark.parametrize("kind", [StrategyKind.S0, StrategyKind.SB])
    def test_permuting_agents_permutes_outputs(self, kind):
        prefs = _prefs((0.3, 0.4), (0.5, 0.6), (0.7, 0.2), (0.45, 0.85))
        ids = [10, 11, 12, 13]
        params = SocietyParams(gamma=1.3)
        base = allocate(kind, prefs, ids, params, 50.0, TIGHT, _stream(11))
        order = [2, 0, 3, 1]
        permuted = allocate(
            kind,
            [prefs[i] for i in order],
            [ids[i] for i in order],
            params,
            50.0,
            TIGHT,
            _stream(11),
        )
        assert np.array_equal(permuted.labor, base.labor[order])
        assert np.array_equal(permuted.consumptions, base.consumptions[order])

    def test_single_agent_min_strategy_degenerates_to_own_choice(self):
        prefs = _prefs((0.4, 0.3))
        params = SocietyParams(gamma=1.2)
        own = allocate(StrategyKind.S0, prefs, [0], params, 12.0, TIGHT, _stream(12))
        minimum = allocate(StrategyKind.SB, prefs, [0], params, 12.0, TIGHT, _stream(12))
        assert minimum.labor[0] == pytest.approx(own.labor[0], abs=1e-3)


class TestMemoryBeliefs:
    """Sb with per-agent believed hours: anchors hold still, others overshoot."""

    def _roster(self):
        # one childless mid-preference agent remembered at the floor is the
        # believed utility minimum; three consumption-lovers remembered high
        prefs = _prefs((0.5, 0.1), (0.15, 0.1), (0.15, 0.2), (0.15, 0.3))
        prev = np.array([12.0, 18.0, 18.0, 18.0])
        return prefs, prev, float(prev.sum())

    def test_workers_overshoot_for_a_believed_anchor(self):
        prefs, prev, ptl = self._roster()
        ids = [0, 1, 2, 3]
        params = SocietyParams(gamma=1.3)
        own = allocate(StrategyKind.S0, prefs, ids, params, ptl, TIGHT, _stream(20))
        minimum = allocate(
            StrategyKind.SB, prefs, ids, params, ptl, TIGHT, _stream(21), prev_labor=prev
        )
        # the anchor's own utility is the believed minimum, so it maximizes it
        assert minimum.labor[0] == pytest.approx(own.labor[0], abs=0.3)
        # everyone else pushes past their private optimum to lift the anchor
        for i in (1, 2, 3):
            assert minimum.labor[i] > own.labor[i] + 2.0

    def test_newcomers_are_imputed_at_the_floor(self):
        prefs, prev, ptl = self._roster()
        ids = [0, 1, 2, 3]
        params = SocietyParams(gamma=1.3)
        marked = prev.copy()
        marked[0] = np.nan
        imputed = allocate(
            StrategyKind.SB, prefs, ids, params, ptl, TIGHT, _stream(22), prev_labor=marked
        )
        explicit = allocate(
            StrategyKind.SB, prefs, ids, params, ptl, TIGHT, _stream(22), prev_labor=prev
        )
        assert np.array_equal(imputed.labor, explicit.labor)

    def test_repeated_play_settles_inside_the_day(self):
        # best-response iteration must not ratchet everyone to a 24 h day
        stream = _stream(23)
        prefs = [
            Preferences(
                alpha=0.05 + 0.9 * stream.generator.random(),
                sigma=0.99 * stream.generator.random(),
            )
            for _ in range(10)
        ]
        ids = list(range(10))
        params = SocietyParams(gamma=1.2)
        prev = None
        ptl = 120.0
        means = []
        for round_ in range(6):
            result = allocate(
                StrategyKind.SB, prefs, ids, params, ptl, TIGHT,
                _stream(30 + round_), prev_labor=prev,
            )
            prev = result.labor
            ptl = float(np.sum(prev))
            means.append(float(np.mean(prev)))
        assert abs(means[-1] - means[-2]) < 0.2
        assert means[-1] < 23.0
        assert float(np.min(prev)) > 0.5

    def test_permuting_agents_permutes_memory(self):
        prefs, prev, ptl = self._roster()
        ids = [10, 11, 12, 13]
        params = SocietyParams(gamma=1.3)
        base = allocate(
            StrategyKind.SB, prefs, ids, params, ptl, TIGHT, _stream(24), prev_labor=prev
        )
        order = [2, 0, 3, 1]
        permuted = allocate(
            StrategyKind.SB,
            [prefs[i] for i in order],
            [ids[i] for i in order],
            params,
            ptl,
            TIGHT,
            _stream(24),
            prev_labor=prev[order],
        )
        assert np.array_equal(permuted.labor, base.labor[order])

    def test_prev_labor_validation(self):
        prefs, prev, ptl = self._roster()
        params = SocietyParams(gamma=1.3)
        with pytest.raises(ParameterError):
            allocate(StrategyKind.SB, prefs, [0, 1, 2, 3], params, ptl, prev_labor=prev[:2])
        bad = prev.copy()
        bad[1] = 25.0
        with pytest.raises(ParameterError):
            allocate(StrategyKind.SB, prefs, [0, 1, 2, 3], params, ptl, prev_labor=bad)
        bad[1] = -1.0
        with pytest.raises(ParameterError):
            allocate(StrategyKind.SB, prefs, [0, 1, 2, 3], params, ptl, prev_labor=bad)


class TestValidation:
    def test_duplicate_ids_rejected(self):
        prefs = _prefs((0.3, 0.4), (0.5, 0.6))
        with pytest.raises(ParameterError):
            allocate(StrategyKind.S0, prefs, [1, 1], SocietyParams(gamma=1.2), 10.0)

    def test_empty_roster_rejected(self):
        with pytest.raises(ParameterError):
            allocate(StrategyKind.S0, [], [], SocietyParams(gamma=1.2), 10.0)

    def test_token_round_trip(self):
        for kind in StrategyKind:
            assert StrategyKind.from_token(kind.token) is kind
        with pytest.raises(ParameterError):
            StrategyKind.from_token("Z")

    def test_objective_value_length_check(self):
        with pytest.raises(ParameterError):
            objective_value(
                StrategyKind.S0, [1.0], _prefs((0.3, 0.4), (0.5, 0.6)), SocietyParams(gamma=1.2), 5.0
            )
