"""
Exhaustive simplex-lattice search for max_omega min_a W_a(omega).

Used only to cross-check solve_optimal. The lattice {m / resolution : sum m =
resolution} is scanned one leader coordinate at a time; per-arm index tables
W_a[m_1, m_a] are precomputed so each chunk is a gather plus a min.
"""

import logging
from math import comb
from typing import Optional, Tuple

import numpy as np

from anchored_bai.config.settings import get_settings
from anchored_bai.indexes.transport import transport_terms
from anchored_bai.spef.instance import BanditInstance
from anchored_bai.utils.errors import BudgetError, DomainError

logger = logging.getLogger(__name__)


def lattice_size(num_arms: int, resolution: int) -> int:
    """Number of points of the simplex lattice with spacing 1/resolution"""
    return comb(resolution + num_arms - 1, num_arms - 1)


def _compositions(total: int, parts: int) -> np.ndarray:
    """All nonnegative integer vectors of length ``parts`` summing to ``total``"""
    if parts == 1:
        return np.array([[total]], dtype=np.int32)
    if parts == 2:
        heads = np.arange(total + 1, dtype=np.int32)
        return np.column_stack([heads, total - heads])
    blocks = []
    for head in range(total + 1):
        tail = _compositions(total - head, parts - 1)
        blocks.append(np.column_stack([np.full(len(tail), head, dtype=np.int32), tail]))
    return np.vstack(blocks)


def _index_table(instance: BanditInstance, arm: int, resolution: int) -> np.ndarray:
    """W_arm(m1/r, ma/r) for all 0 <= m1, ma <= r"""
    grid = np.arange(resolution + 1) / resolution
    n1, na = np.meshgrid(grid, grid, indexing="ij")
    mu1 = instance.means[instance.best_arm]
    with np.errstate(divide="ignore", invalid="ignore"):
        _, d_lead, d_arm = transport_terms(instance.family, mu1, instance.means[arm], n1, na)
        table = n1 * d_lead + na * d_arm
    return np.nan_to_num(table, nan=0.0)


def brute_force_tstar(
    instance: BanditInstance, resolution: int, budget: Optional[int] = None
) -> Tuple[np.ndarray, float]:
    """
    Lattice maximizer of the minimum index and its characteristic time.

    Args:
        instance: Bandit instance
        resolution: Lattice spacing is 1/resolution (>= 10)
        budget: Maximum number of lattice points (Settings.brute_force_budget)

    Returns:
        (omega, t_star) with t_star = 1 / max min_a W_a(omega)

    Raises:
        BudgetError: when the lattice exceeds the budget
    """
    if resolution < 10:
        raise DomainError(f"resolution must be >= 10, got {resolution}")
    budget = get_settings().brute_force_budget if budget is None else budget
    k = instance.num_arms
    size = lattice_size(k, resolution)
    if size > budget:
        raise BudgetError(f"{size} lattice points for K={k}, resolution={resolution} > {budget}")

    best = instance.best_arm
    challengers = instance.challengers
    tables = [_index_table(instance, int(a), resolution) for a in challengers]

    best_value = -np.inf
    best_point = None
    # Leader coordinate 0 gives every index 0
    for m1 in range(1, resolution + 1):
        rest = _compositions(resolution - m1, k - 1)
        values = np.min(
            np.column_stack([table[m1, rest[:, j]] for j, table in enumerate(tables)]), axis=1
        )
        row = int(np.argmax(values))
        if values[row] > best_value:
            best_value = float(values[row])
            best_point = (m1, rest[row])

    omega = np.zeros(k)
    omega[best] = best_point[0]
    omega[challengers] = best_point[1]
    omega /= resolution
    logger.debug(f"lattice search over {size} points: max min index {best_value:.6g}")
    return omega, 1.0 / best_value
