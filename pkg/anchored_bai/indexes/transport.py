"""
Transportation-cost indexes and the anchor function.

For a leader with mean mu1 and count n1 and a challenger with (mua, na):

    x      = (n1 mu1 + na mua) / (n1 + na)          weighted mid
    W      = n1 d(mu1, x) + na d(mua, x)            index
    ratio  = d(mu1, x) / d(mua, x)                  anchor term
    g      = sum over challengers of ratio - 1      anchor

Counts are nonnegative reals so the fluid integrator can reuse every
function here with continuous allocations.
"""

from typing import Tuple

import numpy as np

from anchored_bai.spef.families import SpefFamily
from anchored_bai.utils.errors import DegenerateError, DomainError

# Empirical gaps below this use the 0/0 limits: ratio (na/n1)^2 and index 0
GAP_TOL = 1e-12


def weighted_mid(n1: float, na: float, mu1: float, mua: float) -> float:
    """Count-weighted mean of mu1 and mua"""
    if n1 < 0 or na < 0:
        raise DomainError(f"counts must be nonnegative, got ({n1}, {na})")
    total = n1 + na
    if total <= 0:
        raise DegenerateError("weighted_mid needs n1 + na > 0")
    return (n1 * mu1 + na * mua) / total


def index_value(family: SpefFamily, n1: float, na: float, mu1: float, mua: float) -> float:
    """
    Transportation cost W(n1, na) between a leader and one challenger.

    Equals the minimum over x in [mua, mu1] of n1 d(mu1, x) + na d(mua, x).

    Args:
        family: SPEF of both arms
        n1: Leader count (allocation)
        na: Challenger count (allocation)
        mu1: Leader mean
        mua: Challenger mean

    Returns:
        Index in nats, positively homogeneous of degree 1 in (n1, na)
    """
    family.check(mu1, mua)
    x = weighted_mid(n1, na, mu1, mua)
    if abs(mu1 - mua) < GAP_TOL:
        return 0.0
    return float(n1 * family.divergence(mu1, x) + na * family.divergence(mua, x))


def transport_terms(
    family: SpefFamily, mu1: float, mua: np.ndarray, n1: float, na: np.ndarray
) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Vectorized (x, d(mu1, x), d(mua, x)) for a leader against several arms.

    No domain checks; callers guarantee n1 + na > 0 elementwise.
    """
    mua = np.asarray(mua, dtype=float)
    na = np.asarray(na, dtype=float)
    x = (n1 * mu1 + na * mua) / (n1 + na)
    return x, family.divergence(mu1, x), family.divergence(mua, x)


def pairwise_indexes(
    family: SpefFamily, means: np.ndarray, counts: np.ndarray, best: int
) -> Tuple[np.ndarray, np.ndarray]:
    """
    Indexes and anchor ratios of every arm against ``best``.

    Args:
        family: SPEF of the arms (means are not re-checked)
        means: Arm means, true or empirical
        counts: Nonnegative counts or allocations, not all zero
        best: Leader arm id

    Returns:
        (indexes, ratios), both of length K. indexes[best] is +inf so an
        argmin never selects the leader; ratios[best] is 0.
    """
    means = np.asarray(means, dtype=float)
    counts = np.asarray(counts, dtype=float)
    n1 = counts[best]
    mu1 = means[best]
    gap = mu1 - means
    totals = n1 + counts
    degenerate = np.abs(gap) < GAP_TOL
    # Pairs with no mass at all are handled below; keep the division finite
    safe_totals = np.where(totals > 0, totals, 1.0)

    with np.errstate(divide="ignore", invalid="ignore"):
        x = (n1 * mu1 + counts * means) / safe_totals
        d_lead = family.divergence(mu1, x)
        d_arm = family.divergence(means, x)
        indexes = n1 * d_lead + counts * d_arm
        ratios = d_lead / d_arm
        limit = (counts / n1) ** 2 if n1 > 0 else np.full_like(counts, np.inf)

    ratios = np.where(degenerate, limit, ratios)
    indexes = np.where(degenerate, 0.0, indexes)
    # Unpulled challenger contributes nothing; unpulled leader forces +inf
    ratios = np.where(counts == 0, 0.0, ratios)
    if n1 == 0:
        ratios = np.where(counts > 0, np.inf, ratios)
    indexes = np.where(totals > 0, indexes, 0.0)

    indexes[best] = np.inf
    ratios[best] = 0.0
    return indexes, ratios


def anchor(family: SpefFamily, means: np.ndarray, counts: np.ndarray, best: int) -> float:
    """
    Anchor function g: sum of anchor ratios minus one.

    Zero at the optimal allocation; +inf when the leader is unpulled while
    some challenger is not.
    """
    counts = np.asarray(counts, dtype=float)
    if np.any(counts < 0):
        raise DomainError(f"counts must be nonnegative, got {counts.tolist()}")
    if not np.any(counts > 0):
        raise DegenerateError("anchor is undefined when every count is zero")
    family.check(means)
    _, ratios = pairwise_indexes(family, means, counts, best)
    return float(ratios.sum() - 1.0)
