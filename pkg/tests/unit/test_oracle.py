"""
Unit Tests for the optimal-allocation oracle

Run with: pytest tests/unit/test_oracle.py -v
"""

import math

import numpy as np
import pytest

from anchored_bai.indexes import index_value
from anchored_bai.oracle import (
    anchor_residual,
    brute_force_tstar,
    index_spread,
    lattice_size,
    lower_bound,
    solve_beta_optimal,
    solve_common_index_fixed_n1,
    solve_constrained,
    solve_constrained_total,
    solve_na_given_n1,
    solve_optimal,
)
from anchored_bai.oracle.roots import find_root, solve_monotone
from anchored_bai.sampling import Policy, ThresholdStyle, run_batch
from anchored_bai.spef import BanditInstance, Bernoulli, GaussianKnownVariance, Poisson
from anchored_bai.utils.errors import BudgetError, ConvergenceError, DomainError, InfeasibleError

GAUSS = GaussianKnownVariance()


# ═══════════════════════════════════════════════════════════════════════════════
# Fixtures (Test Setup)
# ═══════════════════════════════════════════════════════════════════════════════


@pytest.fixture
def two_arm():
    return BanditInstance.from_means([1.0, 0.0])


@pytest.fixture
def exp4_instance():
    return BanditInstance.from_means([10.0, 9.4, 7.0, 6.5])


def _random_instances(count, seed=0):
    rng = np.random.default_rng(seed)
    for _ in range(count):
        k = int(rng.integers(2, 7))
        yield BanditInstance.from_means(rng.uniform(0.0, 3.0, k))


# ═══════════════════════════════════════════════════════════════════════════════
# Test Suite 1: Inner solve
# ═══════════════════════════════════════════════════════════════════════════════


class TestSolveNaGivenN1:
    def test_zero_target(self):
        assert solve_na_given_n1(GAUSS, 1.0, 0.0, 1.0, 0.0) == 0.0

    def test_gaussian_closed_form(self):
        assert solve_na_given_n1(GAUSS, 1.0, 0.0, 1.0, 1 / 8) == pytest.approx(1 / 3, abs=1e-12)

    def test_unreachable_target(self):
        with pytest.raises(InfeasibleError):
            solve_na_given_n1(GAUSS, 1.0, 0.0, 1.0, 0.5)

    @pytest.mark.parametrize("family,mu1,mua", [(Bernoulli(), 0.7, 0.4), (Poisson(), 3.0, 1.0)])
    def test_hits_target(self, family, mu1, mua):
        n1 = 2.0
        cap = n1 * float(family.divergence(mu1, mua))
        for fraction in (0.1, 0.5, 0.9):
            target = fraction * cap
            na = solve_na_given_n1(family, mu1, mua, n1, target)
            assert index_value(family, n1, na, mu1, mua) == pytest.approx(
                target, abs=1e-12 * max(1.0, target)
            )

    def test_rejects_nonpositive_n1(self):
        with pytest.raises(DomainError):
            solve_na_given_n1(GAUSS, 1.0, 0.0, 0.0, 0.1)


# ═══════════════════════════════════════════════════════════════════════════════
# Test Suite 2: Constrained solves
# ═══════════════════════════════════════════════════════════════════════════════


class TestSolveConstrained:
    def test_two_arm_symmetric(self, two_arm):
        solution = solve_constrained(two_arm, [1], None, 1 / 8)
        np.testing.assert_allclose(solution.allocations, [0.5, 0.5], atol=1e-10)
        assert solution.n1 >= max(solution.n11, solution.n12)

    def test_reproduces_optimal_up_to_scale(self, exp4_instance):
        optimal = solve_optimal(exp4_instance)
        solution = solve_constrained(exp4_instance, [1, 2, 3], None, optimal.common_index)
        np.testing.assert_allclose(solution.allocations / solution.total, optimal.omega, atol=1e-8)
        assert solution.total == pytest.approx(1.0, rel=1e-8)

    def test_zero_outside_allocations(self, exp4_instance):
        solution = solve_constrained(exp4_instance, [1], {2: 0.0, 3: 0.0}, 0.1)
        assert solution.n11 == 0.0
        assert solution.residual_ratio_sum <= 1e-10
        assert solution.allocations[2] == 0.0

    def test_fixed_outside_arms_enter_ratio_sum(self, exp4_instance):
        fixed = {2: 0.05, 3: 0.04}
        solution = solve_constrained(exp4_instance, [1], fixed, 0.05)
        assert anchor_residual(exp4_instance, solution.allocations) <= 1e-10
        assert solution.n11 > 0
        assert solution.allocations[3] == 0.04

    def test_unequal_targets(self, exp4_instance):
        targets = {1: 0.05, 2: 0.08, 3: 0.1}
        solution = solve_constrained(exp4_instance, [1, 2, 3], None, targets)
        for arm, target in targets.items():
            value = index_value(
                GAUSS,
                solution.n1,
                solution.allocations[arm],
                10.0,
                exp4_instance.means[arm],
            )
            assert value == pytest.approx(target, rel=1e-8)

    def test_total_mass_increases_with_index(self):
        for instance in _random_instances(50, seed=5):
            arms = instance.challengers
            low = solve_constrained(instance, arms, None, 0.1).total
            high = solve_constrained(instance, arms, None, 0.11).total
            assert high > low

    def test_active_set_validation(self, exp4_instance):
        with pytest.raises(DomainError):
            solve_constrained(exp4_instance, [], None, 0.1)
        with pytest.raises(DomainError):
            solve_constrained(exp4_instance, [0, 1], None, 0.1)
        with pytest.raises(DomainError):
            solve_constrained(exp4_instance, [1], None, 0.1)

    def test_constrained_total(self, exp4_instance):
        alloc = np.array([0.0, 0.0, 3.0, 2.0])
        solution = solve_constrained_total(exp4_instance, [1], alloc, 40.0)
        assert solution.total == pytest.approx(40.0, rel=1e-9)
        assert anchor_residual(exp4_instance, solution.allocations) <= 1e-10

    def test_constrained_total_floor(self, exp4_instance):
        alloc = np.array([0.0, 0.0, 3.0, 2.0])
        with pytest.raises(InfeasibleError):
            solve_constrained_total(exp4_instance, [1], alloc, 5.0)


class TestCommonIndexFixedN1:
    def test_budget_is_shared_with_equal_indexes(self, exp4_instance):
        index, alloc = solve_common_index_fixed_n1(exp4_instance, [1, 2, 3], None, 10.0, 12.0)
        assert alloc[[1, 2, 3]].sum() == pytest.approx(12.0, rel=1e-9)
        assert alloc[0] == 10.0
        assert index_spread(exp4_instance, alloc) <= 1e-9 * max(1.0, index)

    def test_zero_budget(self, exp4_instance):
        index, alloc = solve_common_index_fixed_n1(exp4_instance, [1], {2: 1.0, 3: 1.0}, 5.0, 0.0)
        assert index == 0.0
        assert alloc.tolist() == [5.0, 0.0, 1.0, 1.0]


# ═══════════════════════════════════════════════════════════════════════════════
# Test Suite 3: Optimal allocation
# ═══════════════════════════════════════════════════════════════════════════════


class TestSolveOptimal:
    def test_two_arm_gaussian(self, two_arm):
        result = solve_optimal(two_arm)
        np.testing.assert_allclose(result.omega, [0.5, 0.5], atol=1e-8)
        assert result.common_index == pytest.approx(1 / 8, abs=1e-10)
        assert result.t_star == pytest.approx(8.0, abs=1e-8)

    @pytest.mark.parametrize("c", [0.5, 2.0, 3.0])
    def test_scaling(self, c):
        result = solve_optimal(BanditInstance.from_means([c, 0.0]))
        assert result.t_star == pytest.approx(8.0 / c**2, rel=1e-9)

    def test_residuals_on_random_instances(self):
        for instance in _random_instances(100, seed=1):
            result = solve_optimal(instance)
            assert abs(result.omega.sum() - 1.0) <= 1e-12
            assert result.residual_ratio_sum <= 1e-10
            assert result.residual_index_spread <= 1e-10
            assert np.all(result.omega > 0)

    def test_bernoulli_instance(self):
        instance = BanditInstance.from_means([0.7, 0.5, 0.3], family="bernoulli")
        result = solve_optimal(instance)
        assert anchor_residual(instance, result.omega) <= 1e-10
        assert index_spread(instance, result.omega) <= 1e-10

    def test_unique_from_random_starts(self, exp4_instance):
        reference = solve_optimal(exp4_instance).omega
        rng = np.random.default_rng(9)
        for start in rng.uniform(1e-3, 1.0, 20):
            omega = solve_optimal(exp4_instance, initial_index=float(start)).omega
            np.testing.assert_allclose(omega, reference, atol=1e-8)

    def test_lower_bound_below_measured_sample_complexity(self):
        instance = BanditInstance.from_means([10.0, 9.4, 7.0, 6.5, 6.0, 5.5])
        outcomes = run_batch(
            instance, Policy.at2(), 0.001, ThresholdStyle.GK16, 3, range(200), workers=1
        )
        taus = np.array([o.tau for o in outcomes], dtype=float)
        stderr = taus.std(ddof=1) / math.sqrt(taus.size)
        assert lower_bound(instance, 0.001) <= taus.mean() + 3 * stderr

    def test_lower_bound_two_arm(self, two_arm):
        assert lower_bound(two_arm, 0.01) == pytest.approx(8.0 * math.log(100.0))


class TestBetaOptimal:
    def test_two_arm_half(self, two_arm):
        result = solve_beta_optimal(two_arm, 0.5)
        np.testing.assert_allclose(result.omega, [0.5, 0.5], atol=1e-9)
        assert result.beta == 0.5

    def test_leader_share_pinned(self, exp4_instance):
        result = solve_beta_optimal(exp4_instance, 0.3)
        assert result.omega[0] == pytest.approx(0.3)
        assert result.omega.sum() == pytest.approx(1.0)
        assert result.residual_index_spread <= 1e-9

    def test_not_better_than_optimal(self, exp4_instance):
        optimal = solve_optimal(exp4_instance)
        for beta in (0.2, 0.4, 0.6):
            assert solve_beta_optimal(exp4_instance, beta).t_star >= optimal.t_star * (1 - 1e-9)

    def test_beta_range(self, two_arm):
        with pytest.raises(DomainError):
            solve_beta_optimal(two_arm, 1.0)


# ═══════════════════════════════════════════════════════════════════════════════
# Test Suite 4: Simplex lattice search
# ═══════════════════════════════════════════════════════════════════════════════


class TestBruteForce:
    def test_lattice_size(self):
        assert lattice_size(2, 10) == 11
        assert lattice_size(3, 4) == 15

    def test_two_arm(self, two_arm):
        omega, t_star = brute_force_tstar(two_arm, 1000)
        assert abs(t_star - 8.0) <= 1e-3
        np.testing.assert_allclose(omega, [0.5, 0.5])

    def test_not_better_than_solver(self):
        instance = BanditInstance.from_means([1.0, 0.6, 0.2])
        solver = solve_optimal(instance)
        _, t_star = brute_force_tstar(instance, 60)
        assert 1.0 / t_star <= solver.common_index * (1 + 1e-9)

    def test_matches_solver_on_four_arms(self, exp4_instance):
        solver = solve_optimal(exp4_instance)
        _, t_star = brute_force_tstar(exp4_instance, 400)
        assert 1.0 / t_star == pytest.approx(solver.common_index, rel=2e-2)

    def test_resolution_floor(self, two_arm):
        with pytest.raises(DomainError):
            brute_force_tstar(two_arm, 5)

    def test_budget(self, exp4_instance):
        with pytest.raises(BudgetError):
            brute_force_tstar(exp4_instance, 400, budget=1000)


class TestRoots:
    @pytest.mark.parametrize("method", ["bisect", "brentq"])
    def test_methods_agree(self, method):
        root = find_root(lambda x: x**3 - 2.0, 0.0, 2.0, method=method)
        assert root == pytest.approx(2.0 ** (1 / 3), rel=1e-14)

    def test_decreasing_map_from_far_guess(self):
        root = solve_monotone(lambda x: 1.0 / x - 4.0, 100.0, increasing=False)
        assert root == pytest.approx(0.25, rel=1e-14)

    def test_no_sign_change(self):
        with pytest.raises(ConvergenceError):
            find_root(lambda x: x + 1.0, 0.0, 1.0)

    def test_unknown_method(self):
        with pytest.raises(ValueError):
            find_root(lambda x: x, -1.0, 1.0, method="newton")
