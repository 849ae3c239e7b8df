"""
Unit Tests for indexes, the anchor function and empirical reports

Run with: pytest tests/unit/test_anchor_index.py -v
"""

import numpy as np
import pytest

from anchored_bai.indexes import (
    IndexReport,
    SamplingState,
    anchor,
    empirical_report,
    index_value,
    pairwise_indexes,
    stopping_statistic,
    weighted_mid,
)
from anchored_bai.sampling import Policy, ThresholdStyle, choose_arm, run_until_stop
from anchored_bai.spef import BanditInstance, Bernoulli, Exponential, GaussianKnownVariance, Poisson
from anchored_bai.utils.errors import DegenerateError, DomainError
from anchored_bai.utils.rng import StreamRole, substream

GAUSS = GaussianKnownVariance()


def _state(means, counts, empirical, family="gaussian"):
    """State whose empirical means equal ``empirical``"""
    instance = BanditInstance.from_means(means, family=family)
    counts = np.asarray(counts)
    return instance, SamplingState(instance, counts, counts * np.asarray(empirical, dtype=float))


# ═══════════════════════════════════════════════════════════════════════════════
# Test Suite 1: Weighted mid and index
# ═══════════════════════════════════════════════════════════════════════════════


class TestWeightedMid:
    def test_midpoint(self):
        assert weighted_mid(1, 1, 0, 2) == 1

    def test_zero_weight(self):
        assert weighted_mid(3, 0, 5, 7) == 5

    def test_weighted(self):
        assert weighted_mid(2, 1, 7.25, 7.05) == pytest.approx(7.18333333333)

    def test_degenerate(self):
        with pytest.raises(DegenerateError):
            weighted_mid(0, 0, 1, 2)

    def test_negative_count(self):
        with pytest.raises(DomainError):
            weighted_mid(-1, 2, 1, 2)


class TestIndexValue:
    def test_gaussian_half_half(self):
        assert index_value(GAUSS, 0.5, 0.5, 1.0, 0.0) == pytest.approx(1 / 8)

    def test_zero_challenger_count(self):
        assert index_value(GAUSS, 3.0, 0.0, 1.0, 0.0) == 0.0

    def test_gaussian_closed_form(self):
        assert index_value(GAUSS, 2, 1, 10, 9.4) == pytest.approx(0.12)

    def test_degenerate_counts(self):
        with pytest.raises(DegenerateError):
            index_value(GAUSS, 0, 0, 1, 0)

    @pytest.mark.parametrize(
        "family,low,high",
        [
            (GAUSS, -3.0, 3.0),
            (Bernoulli(), 0.05, 0.95),
            (Poisson(), 0.5, 5.0),
            (Exponential(), 0.5, 5.0),
        ],
        ids=["gaussian", "bernoulli", "poisson", "exponential"],
    )
    def test_equals_grid_minimum(self, family, low, high):
        rng = np.random.default_rng(0)
        for _ in range(200):
            mua, mu1 = np.sort(rng.uniform(low, high, 2))
            n1, na = rng.uniform(0.1, 10.0, 2)
            grid = np.linspace(mua, mu1, 10_000)
            brute = np.min(n1 * family.divergence(mu1, grid) + na * family.divergence(mua, grid))
            value = index_value(family, n1, na, mu1, mua)
            assert value <= brute * (1 + 1e-12) + 1e-15
            assert value == pytest.approx(brute, rel=1e-4)

    def test_positive_homogeneity(self):
        rng = np.random.default_rng(1)
        for family, mu1, mua in [(GAUSS, 1.0, 0.2), (Bernoulli(), 0.7, 0.4), (Poisson(), 3.0, 1.5)]:
            n1, na = rng.uniform(0.5, 5.0, 2)
            c = rng.uniform(0.1, 10.0)
            base = index_value(family, n1, na, mu1, mua)
            scaled = index_value(family, c * n1, c * na, mu1, mua)
            assert scaled == pytest.approx(c * base, rel=1e-12)


# ═══════════════════════════════════════════════════════════════════════════════
# Test Suite 2: Anchor function
# ═══════════════════════════════════════════════════════════════════════════════


class TestAnchor:
    def test_two_arm_equal_counts(self):
        assert anchor(GAUSS, np.array([1.0, 0.0]), np.array([4, 4]), 0) == pytest.approx(0.0)

    def test_three_arm_closed_form(self):
        means = np.array([1.0, 0.3, -0.5])
        assert anchor(GAUSS, means, np.array([2, 1, 1]), 0) == pytest.approx(-0.5)

    def test_unpulled_leader_is_infinite(self):
        assert anchor(GAUSS, np.array([1.0, 0.0]), np.array([0, 3]), 0) == np.inf

    def test_unpulled_challenger_contributes_nothing(self):
        means = np.array([1.0, 0.0, -1.0])
        assert anchor(GAUSS, means, np.array([2, 2, 0]), 0) == pytest.approx(0.0)

    def test_all_zero_counts(self):
        with pytest.raises(DegenerateError):
            anchor(GAUSS, np.array([1.0, 0.0]), np.array([0, 0]), 0)

    def test_gaussian_identity(self):
        rng = np.random.default_rng(2)
        for _ in range(100):
            means = np.concatenate([[5.0], rng.uniform(0.0, 4.9, 3)])
            counts = rng.uniform(0.1, 20.0, 4)
            expected = np.sum((counts[1:] / counts[0]) ** 2) - 1.0
            value = anchor(GAUSS, means, counts, 0)
            assert value == pytest.approx(expected, abs=1e-12 * (1 + abs(expected)))

    @pytest.mark.parametrize(
        "family,means",
        [
            (GAUSS, [2.0, 1.1, 0.4, -0.3]),
            (Bernoulli(), [0.8, 0.6, 0.5, 0.3]),
            (Poisson(), [4.0, 3.0, 2.5, 1.0]),
        ],
    )
    def test_monotone_in_counts(self, family, means):
        means = np.asarray(means)
        rng = np.random.default_rng(3)
        eps = 1e-4
        for _ in range(500 // 3):
            counts = rng.uniform(1.0, 50.0, means.size)
            g = anchor(family, means, counts, 0)
            bumped = counts.copy()
            bumped[0] += eps
            assert anchor(family, means, bumped, 0) < g
            arm = rng.integers(1, means.size)
            bumped = counts.copy()
            bumped[arm] += eps
            assert anchor(family, means, bumped, 0) > g


# ═══════════════════════════════════════════════════════════════════════════════
# Test Suite 3: Pairwise helper
# ═══════════════════════════════════════════════════════════════════════════════


class TestPairwiseIndexes:
    def test_leader_entries(self):
        indexes, ratios = pairwise_indexes(GAUSS, np.array([0.0, 1.0]), np.array([2, 2]), 1)
        assert indexes[1] == np.inf
        assert ratios[1] == 0.0

    def test_degenerate_gap_limits(self):
        means = np.array([1.0, 1.0, 0.0])
        indexes, ratios = pairwise_indexes(GAUSS, means, np.array([4, 2, 4]), 0)
        assert indexes[1] == 0.0
        assert ratios[1] == pytest.approx(0.25)

    def test_matches_index_value(self):
        means = np.array([0.7, 0.5, 0.2])
        counts = np.array([5.0, 3.0, 1.5])
        indexes, _ = pairwise_indexes(Bernoulli(), means, counts, 0)
        for a in (1, 2):
            expected = index_value(Bernoulli(), 5.0, counts[a], 0.7, means[a])
            assert indexes[a] == pytest.approx(expected)


# ═══════════════════════════════════════════════════════════════════════════════
# Test Suite 4: Empirical reports and stopping statistic
# ═══════════════════════════════════════════════════════════════════════════════


class TestEmpiricalReport:
    def test_two_arm_closed_form(self):
        instance, state = _state([1.0, 0.0], [1, 1], [1.0, 0.0])
        report = empirical_report(instance, state)
        assert report.best_arm == 0
        assert report.indexes[1] == pytest.approx(0.25)
        assert report.anchor_value == pytest.approx(0.0)
        assert report.min_index_arm == 1

    def test_equal_empirical_means(self):
        instance, state = _state([1.0, 0.5, 0.0], [4, 2, 6], [0.3, 0.3, 0.3])
        report = empirical_report(instance, state)
        assert report.best_arm == 0
        assert report.indexes[1] == 0.0 and report.indexes[2] == 0.0
        assert report.anchor_value == pytest.approx((2 / 4) ** 2 + (6 / 4) ** 2 - 1)
        assert report.min_index_arm == 1

    def test_empirical_leader_can_differ_from_true_best(self):
        instance, state = _state([1.0, 0.0], [3, 3], [0.1, 0.4])
        assert empirical_report(instance, state).best_arm == 1

    def test_unpulled_arm(self):
        instance, state = _state([1.0, 0.0, -1.0], [2, 0, 1], [1.0, 0.0, -1.0])
        with pytest.raises(DegenerateError):
            empirical_report(instance, state)

    def test_bernoulli_boundary_means_projected(self):
        instance, state = _state([0.6, 0.4], [3, 3], [1.0, 0.0], family="bernoulli")
        report = empirical_report(instance, state)
        assert np.isfinite(report.indexes[1])
        assert report.indexes[1] > 0

    def test_pure_function(self):
        instance, state = _state([1.0, 0.5, 0.0], [5, 3, 2], [0.9, 0.4, 0.1])
        first = empirical_report(instance, state)
        second = empirical_report(instance, state.snapshot())
        np.testing.assert_array_equal(first.indexes, second.indexes)
        assert first.anchor_value == second.anchor_value

    def test_replay_from_pull_log(self):
        """Report at N=100 of a fixed-seed run equals a recomputation from its counts and sums"""
        instance = BanditInstance.from_means([10.0, 9.4, 7.0, 6.5])
        outcome = run_until_stop(
            instance,
            Policy.at2(),
            0.001,
            ThresholdStyle.GK16,
            substream(3, 0, StreamRole.REWARDS),
            cap=100,
            stopping=False,
        )
        assert outcome.tau == 100

        # Replay the same stream and log every pull
        rng = substream(3, 0, StreamRole.REWARDS)
        state = SamplingState(instance)
        for _ in range(100):
            arm = choose_arm(state, Policy.at2())
            state.update(arm, float(instance.family.draw(instance.means[arm], rng)))
        np.testing.assert_array_equal(state.counts, outcome.final_counts)

        report = empirical_report(instance, state)
        means = state.reward_sums / state.counts
        best = int(np.argmax(means))
        for a in range(4):
            if a == best:
                continue
            n1, na = state.counts[best], state.counts[a]
            expected = index_value(GAUSS, n1, na, means[best], means[a])
            assert report.indexes[a] == pytest.approx(expected)


class TestStoppingStatistic:
    def test_minimum(self):
        report = IndexReport.build(0, [np.inf, np.inf, 5.0, 4.2, 6.1], 0.0)
        assert stopping_statistic(report) == 4.2
        assert report.min_index_arm == 3

    def test_ties_resolve_to_lowest_id(self):
        report = IndexReport.build(0, [np.inf, 2.0, 2.0, 2.0], 0.0)
        assert stopping_statistic(report) == 2.0
        assert report.min_index_arm == 1

    def test_two_arm(self):
        report = IndexReport.build(1, [0.7, np.inf], 0.0)
        assert stopping_statistic(report) == 0.7

    def test_normalized_indexes(self):
        instance, state = _state([1.0, 0.0], [2, 2], [1.0, 0.0])
        report = empirical_report(instance, state)
        assert report.normalized_indexes()[1] == pytest.approx(report.indexes[1] / 4)

    def test_normalized_indexes_need_pulls(self):
        with pytest.raises(DegenerateError):
            IndexReport.build(0, [np.inf, 1.0], 0.0).normalized_indexes()


class TestSamplingState:
    def test_total_pulls_inferred(self):
        instance = BanditInstance.from_means([1.0, 0.0])
        state = SamplingState(instance, np.array([2, 3]), np.array([1.0, 0.5]))
        assert state.total_pulls == 5

    def test_inconsistent_total(self):
        instance = BanditInstance.from_means([1.0, 0.0])
        with pytest.raises(ValueError):
            SamplingState(instance, np.array([2, 3]), np.array([1.0, 0.5]), total_pulls=4)

    def test_snapshot_is_independent(self):
        instance = BanditInstance.from_means([1.0, 0.0])
        state = SamplingState(instance)
        state.update(0, 1.0)
        copy = state.snapshot()
        state.update(1, 0.0)
        assert copy.total_pulls == 1
        assert copy.counts.tolist() == [1, 0]
