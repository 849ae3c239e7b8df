"""
Arm selection at iteration N from the statistics after N - 1 pulls.
"""

from typing import Optional

import numpy as np

from anchored_bai.indexes.empirical import IndexReport, SamplingState, empirical_report
from anchored_bai.sampling.policy import Policy
from anchored_bai.utils.errors import MissingCoinError


def under_explored(counts: np.ndarray, n: int, alpha: float) -> bool:
    """True when some arm has fewer than n**alpha pulls"""
    return bool(counts.min() < n**alpha)


def challenger(report: IndexReport, improved: bool) -> int:
    """Smallest-index challenger (index + ln(count) when improved); lowest id on ties"""
    scores = report.indexes
    if improved:
        scores = scores + np.log(report.counts)
    return int(np.argmin(scores))


def choose_arm(
    state: SamplingState,
    policy: Policy,
    coin: Optional[float] = None,
    report: Optional[IndexReport] = None,
) -> int:
    """
    Pick the arm to pull at iteration N = state.total_pulls + 1.

    Args:
        state: Statistics after N - 1 pulls
        policy: Sampling rule
        coin: Uniform draw in [0, 1), required by beta-EB policies outside
            forced exploration
        report: Precomputed empirical_report(state); computed when omitted

    Returns:
        Arm id

    Raises:
        MissingCoinError: beta-EB policy past forced exploration without a coin
    """
    n = state.total_pulls + 1
    counts = state.counts
    if under_explored(counts, n, policy.alpha):
        return int(np.argmin(counts))

    if report is None:
        report = empirical_report(state.instance, state)

    if policy.uses_coin:
        if coin is None:
            raise MissingCoinError(f"{policy.name} needs a uniform draw at N={n}")
        if coin < policy.beta:
            return report.best_arm
    elif report.anchor_value > 0:
        return report.best_arm

    return challenger(report, policy.improved_challenger)
