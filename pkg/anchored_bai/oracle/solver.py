"""
Optimal allocation solver.

Computes the optimal proportions omega*, the common index I* and the
characteristic time T* = 1/I* through three nested monotone solves:

- inner:  N_a given N_1 and a target index (index is increasing in N_a)
- middle: N_1 solving the ratio-sum equation sum_a d(mu_1, x_1a)/d(mu_a, x_1a) = 1
          (left-hand side is decreasing in N_1 once each N_a tracks its target)
- outer:  the common index I giving a prescribed total mass (increasing in I)

Arms outside the active set B keep fixed allocations; they enter only the
ratio-sum. The same machinery projects fluid states back onto the optimality
manifold and solves the beta-constrained variant (omega_1 pinned to beta).

Usage:
    from anchored_bai.oracle import solve_optimal
    from anchored_bai.spef import BanditInstance

    result = solve_optimal(BanditInstance.from_means([10, 9.4, 7, 6.5]))
    print(result.omega, result.t_star)
"""

import logging
import math
from dataclasses import dataclass
from typing import Dict, Iterable, Mapping, Optional, Tuple, Union

import numpy as np

from anchored_bai.config.settings import get_settings
from anchored_bai.indexes.transport import pairwise_indexes, transport_terms
from anchored_bai.oracle.roots import solve_monotone
from anchored_bai.spef.families import GaussianKnownVariance, SpefFamily
from anchored_bai.spef.instance import BanditInstance
from anchored_bai.utils.errors import ConvergenceError, DomainError, InfeasibleError

logger = logging.getLogger(__name__)

Allocations = Union[Mapping[int, float], np.ndarray, None]
Targets = Union[float, Mapping[int, float]]


# ═══════════════════════════════════════════════════════════════════════════════
# Result records
# ═══════════════════════════════════════════════════════════════════════════════


@dataclass(frozen=True, eq=False)
class ConstrainedSolution:
    """
    Point on the optimality manifold for an active set B.

    ``allocations`` covers every arm: the solved N_1 and N_b (b in B) and
    the fixed allocations of the remaining challengers.
    """

    allocations: np.ndarray
    active: Tuple[int, ...]
    targets: np.ndarray
    n11: float
    n12: float
    residual_ratio_sum: float
    residual_index: float
    best_arm: int = 0

    @property
    def n1(self) -> float:
        return float(self.allocations[self.best_arm])

    @property
    def total(self) -> float:
        return float(self.allocations.sum())

    @property
    def common_index(self) -> float:
        """I_B: the smallest target over B (all equal in the common-index case)"""
        return float(self.targets.min())

    def to_dict(self) -> Dict[str, object]:
        return {
            "allocations": self.allocations.tolist(),
            "active": list(self.active),
            "common_index": self.common_index,
            "n11": self.n11,
            "n12": self.n12,
            "residual_ratio_sum": self.residual_ratio_sum,
            "residual_index": self.residual_index,
        }


@dataclass(frozen=True, eq=False)
class OptimalAllocation:
    """omega* with its common index and characteristic time"""

    omega: np.ndarray
    common_index: float
    t_star: float
    residual_ratio_sum: float
    residual_index_spread: float
    beta: Optional[float] = None

    def to_dict(self) -> Dict[str, object]:
        out = {
            "omega": self.omega.tolist(),
            "common_index": self.common_index,
            "t_star": self.t_star,
            "residual_ratio_sum": self.residual_ratio_sum,
            "residual_index_spread": self.residual_index_spread,
        }
        if self.beta is not None:
            out["beta"] = self.beta
        return out


# ═══════════════════════════════════════════════════════════════════════════════
# Inner solve: N_a given N_1
# ═══════════════════════════════════════════════════════════════════════════════


def _solve_na(
    family: SpefFamily, mu1: float, mua: float, n1: float, target: float, cap: float
) -> float:
    if target == 0.0:
        return 0.0
    if isinstance(family, GaussianKnownVariance):
        return target * n1 / (cap - target)

    def excess(na: float) -> float:
        x = (n1 * mu1 + na * mua) / (n1 + na)
        return float(n1 * family.divergence(mu1, x) + na * family.divergence(mua, x)) - target

    # Gaussian closed form as the starting guess
    return solve_monotone(excess, target * n1 / (cap - target), first_step=0.5)


def solve_na_given_n1(
    family: SpefFamily, mu1: float, mua: float, n1: float, target_index: float
) -> float:
    """
    The unique N_a with index_value(n1, N_a, mu1, mua) == target_index.

    Raises:
        InfeasibleError: if n1 * d(mu1, mua) <= target_index (the index only
            approaches that value as N_a grows without bound)
    """
    family.check(mu1, mua)
    if not n1 > 0:
        raise DomainError(f"n1 must be positive, got {n1}")
    if target_index < 0:
        raise DomainError(f"target index must be nonnegative, got {target_index}")
    cap = n1 * float(family.divergence(mu1, mua))
    if cap <= target_index:
        raise InfeasibleError(f"target {target_index} unreachable: n1 * d(mu1, mua) = {cap}")
    return _solve_na(family, mu1, mua, n1, target_index, cap)


def _inner_allocations(
    instance: BanditInstance, n1: float, arms: np.ndarray, targets: np.ndarray
) -> np.ndarray:
    family = instance.family
    mu1 = instance.means[instance.best_arm]
    mua = instance.means[arms]
    caps = n1 * family.divergence(mu1, mua)
    if np.any(caps <= targets):
        raise InfeasibleError(f"targets {targets.tolist()} unreachable at n1={n1}")
    if instance.is_gaussian:
        return targets * n1 / (caps - targets)
    return np.array([_solve_na(family, mu1, m, n1, t, c) for m, t, c in zip(mua, targets, caps)])


# ═══════════════════════════════════════════════════════════════════════════════
# Middle solve: N_1 from the ratio-sum equation
# ═══════════════════════════════════════════════════════════════════════════════


def _ratio_sum(instance: BanditInstance, n1: float, arms: np.ndarray, alloc: np.ndarray) -> float:
    if arms.size == 0:
        return 0.0
    mu1 = instance.means[instance.best_arm]
    _, d_lead, d_arm = transport_terms(instance.family, mu1, instance.means[arms], n1, alloc)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratios = np.where(alloc > 0, d_lead / d_arm, 0.0)
    return float(ratios.sum())


def _n11(instance: BanditInstance, outside: np.ndarray, fixed: np.ndarray) -> float:
    """Smallest N_1 at which the outside arms alone keep the ratio-sum <= 1"""
    if fixed.sum() <= 0:
        return 0.0
    guess = float(np.sqrt(np.sum(fixed**2)))
    return solve_monotone(
        lambda n1: _ratio_sum(instance, n1, outside, fixed) - 1.0, guess, increasing=False
    )


def _solve_constrained(
    instance: BanditInstance,
    active: np.ndarray,
    outside: np.ndarray,
    fixed: np.ndarray,
    targets: np.ndarray,
    tol: float,
    n1_hint: Optional[float] = None,
) -> ConstrainedSolution:
    family = instance.family
    best = instance.best_arm
    mu1 = instance.means[best]
    n12 = float(np.max(targets / family.divergence(mu1, instance.means[active])))
    n11 = _n11(instance, outside, fixed)
    low = max(n11, n12)

    def ratio_excess(n1: float) -> float:
        alloc = _inner_allocations(instance, n1, active, targets)
        outer = _ratio_sum(instance, n1, outside, fixed)
        return outer + _ratio_sum(instance, n1, active, alloc) - 1.0

    warm = n1_hint is not None and n1_hint > low
    guess = n1_hint if warm else 2.0 * low
    n1 = solve_monotone(
        ratio_excess,
        guess,
        lower_limit=low,
        increasing=False,
        first_step=1e-6 if warm else 1.0,
    )

    allocations = np.zeros(instance.num_arms)
    allocations[best] = n1
    allocations[active] = _inner_allocations(instance, n1, active, targets)
    allocations[outside] = fixed

    indexes, ratios = pairwise_indexes(family, instance.means, allocations, best)
    residual_ratio = abs(float(ratios.sum()) - 1.0)
    residual_index = float(np.max(np.abs(indexes[active] - targets) / np.maximum(1.0, targets)))
    if residual_ratio > tol or residual_index > tol:
        raise ConvergenceError(
            f"constrained solve missed tolerance {tol}",
            residuals={"ratio_sum": residual_ratio, "index": residual_index, "n1": n1},
        )

    return ConstrainedSolution(
        allocations=allocations,
        active=tuple(int(a) for a in active),
        targets=targets,
        n11=n11,
        n12=n12,
        residual_ratio_sum=residual_ratio,
        residual_index=residual_index,
        best_arm=best,
    )


# ═══════════════════════════════════════════════════════════════════════════════
# Validation helpers
# ═══════════════════════════════════════════════════════════════════════════════


def _validate_active(
    instance: BanditInstance, active: Iterable[int]
) -> Tuple[np.ndarray, np.ndarray]:
    arms = np.array(sorted({int(a) for a in active}), dtype=int)
    challengers = instance.challengers
    if arms.size == 0:
        raise DomainError("active set B must be non-empty")
    if not np.all(np.isin(arms, challengers)):
        raise DomainError(f"active set {arms.tolist()} must be challengers {challengers.tolist()}")
    return arms, np.setdiff1d(challengers, arms)


def _validate_fixed(
    instance: BanditInstance, outside: np.ndarray, fixed: Allocations
) -> np.ndarray:
    if outside.size == 0:
        return np.zeros(0)
    if fixed is None:
        raise DomainError(f"allocations required for arms {outside.tolist()} outside B")
    if isinstance(fixed, Mapping):
        missing = [int(a) for a in outside if int(a) not in fixed]
        if missing:
            raise DomainError(f"allocations missing for arms {missing}")
        values = np.array([float(fixed[int(a)]) for a in outside])
    else:
        values = np.asarray(fixed, dtype=float)[outside]
    if np.any(values < 0) or not np.all(np.isfinite(values)):
        raise DomainError(f"fixed allocations must be finite and >= 0, got {values.tolist()}")
    return values


def _validate_targets(active: np.ndarray, targets: Targets) -> np.ndarray:
    if isinstance(targets, Mapping):
        values = np.array([float(targets[int(a)]) for a in active])
    else:
        values = np.full(active.size, float(targets))
    if not np.all(values > 0):
        raise DomainError(f"targets must be positive, got {values.tolist()}")
    return values


def _resolve_tol(tol: Optional[float]) -> float:
    return get_settings().solver_tol if tol is None else float(tol)


# ═══════════════════════════════════════════════════════════════════════════════
# Public solves
# ═══════════════════════════════════════════════════════════════════════════════


def solve_constrained(
    instance: BanditInstance,
    active: Iterable[int],
    fixed: Allocations,
    targets: Targets,
    tol: Optional[float] = None,
    n1_hint: Optional[float] = None,
) -> ConstrainedSolution:
    """
    Solve the ratio-sum equation with per-arm index targets on B.

    Args:
        instance: Bandit instance (true means)
        active: Active set B, a non-empty subset of the challengers
        fixed: Allocations of the challengers outside B (mapping or full vector)
        targets: Common target index, or one positive target per arm of B
        tol: Residual tolerance (Settings.solver_tol by default)
        n1_hint: Warm start for the N_1 solve

    Returns:
        ConstrainedSolution with N_1 >= max(N_11, N_12)
    """
    arms, outside = _validate_active(instance, active)
    fixed_values = _validate_fixed(instance, outside, fixed)
    target_values = _validate_targets(arms, targets)
    return _solve_constrained(
        instance, arms, outside, fixed_values, target_values, _resolve_tol(tol), n1_hint
    )


def solve_constrained_total(
    instance: BanditInstance,
    active: Iterable[int],
    fixed: Allocations,
    total: float,
    tol: Optional[float] = None,
    index_hint: Optional[float] = None,
    n1_hint: Optional[float] = None,
) -> ConstrainedSolution:
    """
    The manifold point with common index on B and total mass ``total``.

    Total mass is strictly increasing in the common index, so the index is
    found by a monotone outer solve around solve_constrained.

    Raises:
        InfeasibleError: if the fixed arms alone already need more than ``total``
    """
    tol = _resolve_tol(tol)
    arms, outside = _validate_active(instance, active)
    fixed_values = _validate_fixed(instance, outside, fixed)
    floor = _n11(instance, outside, fixed_values) + float(fixed_values.sum())
    if total <= floor:
        raise InfeasibleError(f"total {total} does not exceed the fixed-arm floor {floor}")

    family = instance.family
    mu1 = instance.means[instance.best_arm]
    # (index, n1) of the latest inner solve, used to warm-start the next one
    last = {"index": None, "n1": n1_hint}

    def solve_at(index: float) -> ConstrainedSolution:
        hint = last["n1"]
        if hint is not None and last["index"]:
            hint = hint * index / last["index"]
        sol = _solve_constrained(
            instance, arms, outside, fixed_values, np.full(arms.size, index), tol, hint
        )
        last["index"], last["n1"] = index, sol.n1
        return sol

    if index_hint is not None and index_hint > 0:
        guess, first_step = float(index_hint), 1e-6
    else:
        free = total - float(fixed_values.sum())
        kl_min = float(np.min(family.divergence(mu1, instance.means[arms])))
        guess, first_step = free * kl_min / (2.0 * instance.num_arms), 1.0

    index = solve_monotone(lambda i: solve_at(i).total - total, guess, first_step=first_step)
    return solve_at(index)


def solve_common_index_fixed_n1(
    instance: BanditInstance,
    active: Iterable[int],
    fixed: Allocations,
    n1: float,
    budget: float,
    index_hint: Optional[float] = None,
) -> Tuple[float, np.ndarray]:
    """
    Common index on B when N_1 is pinned and sum_{b in B} N_b == budget.

    Args:
        instance: Bandit instance
        active: Active set B
        fixed: Allocations of the challengers outside B (copied to the output)
        n1: Pinned leader allocation
        budget: Mass shared by the arms of B
        index_hint: Warm start for the index solve

    Returns:
        (common index, full allocation vector)
    """
    arms, outside = _validate_active(instance, active)
    fixed_values = _validate_fixed(instance, outside, fixed)
    if not n1 > 0:
        raise DomainError(f"n1 must be positive, got {n1}")
    if budget < 0:
        raise DomainError(f"budget must be nonnegative, got {budget}")

    allocations = np.zeros(instance.num_arms)
    allocations[instance.best_arm] = n1
    allocations[outside] = fixed_values
    if budget == 0:
        return 0.0, allocations

    mu1 = instance.means[instance.best_arm]
    index_max = n1 * float(np.min(instance.family.divergence(mu1, instance.means[arms])))

    def mass_excess(index: float) -> float:
        targets = np.full(arms.size, index)
        return float(_inner_allocations(instance, n1, arms, targets).sum()) - budget

    warm = index_hint is not None and 0 < index_hint < index_max
    index = solve_monotone(
        mass_excess,
        index_hint if warm else index_max / 2.0,
        upper_limit=index_max,
        first_step=1e-6 if warm else 0.5,
    )
    allocations[arms] = _inner_allocations(instance, n1, arms, np.full(arms.size, index))
    return index, allocations


def anchor_residual(instance: BanditInstance, allocations: np.ndarray) -> float:
    """|g(mu, N)| at the true means"""
    _, ratios = pairwise_indexes(instance.family, instance.means, allocations, instance.best_arm)
    return abs(float(ratios.sum()) - 1.0)


def index_spread(
    instance: BanditInstance, allocations: np.ndarray, arms: Optional[Iterable[int]] = None
) -> float:
    """Largest pairwise gap between the true indexes of ``arms`` (default: all challengers)"""
    indexes, _ = pairwise_indexes(instance.family, instance.means, allocations, instance.best_arm)
    selected = instance.challengers if arms is None else np.asarray(list(arms), dtype=int)
    return float(np.ptp(indexes[selected]))


def solve_optimal(
    instance: BanditInstance, tol: Optional[float] = None, initial_index: Optional[float] = None
) -> OptimalAllocation:
    """
    Optimal proportions omega*, common index I* and T* = 1/I*.

    Args:
        instance: Bandit instance
        tol: Residual tolerance on |g| and on the index spread
        initial_index: Starting point of the outer index search

    Returns:
        OptimalAllocation with omega summing to 1

    Raises:
        ConvergenceError: residuals above tolerance
    """
    tol = _resolve_tol(tol)
    solution = solve_constrained_total(
        instance, instance.challengers, None, 1.0, tol=tol, index_hint=initial_index
    )
    mass = solution.total
    omega = solution.allocations / mass
    # Indexes are homogeneous of degree 1 in the allocations
    common_index = solution.common_index / mass

    ratio_residual = anchor_residual(instance, omega)
    spread = index_spread(instance, omega)
    if ratio_residual > tol or spread > tol:
        raise ConvergenceError(
            f"optimal allocation missed tolerance {tol}",
            residuals={"ratio_sum": ratio_residual, "index_spread": spread},
        )

    result = OptimalAllocation(
        omega=omega,
        common_index=common_index,
        t_star=1.0 / common_index,
        residual_ratio_sum=ratio_residual,
        residual_index_spread=spread,
    )
    logger.info(f"Solved {instance!r}: T*={result.t_star:.6g}, omega*={np.round(omega, 6)}")
    return result


def solve_beta_optimal(instance: BanditInstance, beta: float) -> OptimalAllocation:
    """
    beta-optimal proportions: omega_1 = beta and equal challenger indexes.

    ``residual_ratio_sum`` holds the beta-anchor residual |omega_1 - beta|.
    """
    if not 0.0 < beta < 1.0:
        raise DomainError(f"beta must lie in (0, 1), got {beta}")
    _, omega = solve_common_index_fixed_n1(instance, instance.challengers, None, beta, 1.0 - beta)
    challengers = instance.challengers
    omega[challengers] *= (1.0 - beta) / omega[challengers].sum()

    indexes, _ = pairwise_indexes(instance.family, instance.means, omega, instance.best_arm)
    common_index = float(indexes[challengers].min())
    return OptimalAllocation(
        omega=omega,
        common_index=common_index,
        t_star=1.0 / common_index,
        residual_ratio_sum=abs(float(omega[instance.best_arm]) - beta),
        residual_index_spread=float(np.ptp(indexes[challengers])),
        beta=float(beta),
    )


def lower_bound(instance: BanditInstance, delta: float) -> float:
    """T*(mu) * log(1/delta), the leading term of the sample-complexity lower bound"""
    if not 0.0 < delta < 1.0:
        raise DomainError(f"delta must lie in (0, 1), got {delta}")
    return solve_optimal(instance).t_star * math.log(1.0 / delta)
