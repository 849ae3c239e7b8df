"""
Empirical statistics of a sampling run and the GLLR stopping statistic.

SamplingState is mutated only by its owning run loop. IndexReport is the
per-iteration view the policies act on: empirical leader, per-arm empirical
indexes, anchor value and the minimum index with its arm.
"""

from dataclasses import dataclass
from typing import Dict, Optional

import numpy as np

from anchored_bai.indexes.transport import pairwise_indexes
from anchored_bai.spef.instance import BanditInstance
from anchored_bai.utils.errors import DegenerateError


@dataclass
class SamplingState:
    """Per-arm pull counts and reward sums after total_pulls iterations"""

    instance: BanditInstance
    counts: Optional[np.ndarray] = None
    reward_sums: Optional[np.ndarray] = None
    total_pulls: int = 0

    def __post_init__(self):
        k = self.instance.num_arms
        if self.counts is None:
            self.counts = np.zeros(k, dtype=np.int64)
        if self.reward_sums is None:
            self.reward_sums = np.zeros(k, dtype=float)
        self.counts = np.asarray(self.counts, dtype=np.int64)
        self.reward_sums = np.asarray(self.reward_sums, dtype=float)
        if self.counts.shape != (k,) or self.reward_sums.shape != (k,):
            raise ValueError(f"state vectors must have length {k}")
        if np.any(self.counts < 0):
            raise ValueError("counts must be nonnegative")
        pulled = int(self.counts.sum())
        if self.total_pulls == 0:
            self.total_pulls = pulled
        elif self.total_pulls != pulled:
            raise ValueError(f"total_pulls {self.total_pulls} != sum(counts) {pulled}")

    @property
    def num_arms(self) -> int:
        return self.instance.num_arms

    @property
    def all_pulled(self) -> bool:
        return bool(np.all(self.counts > 0))

    def update(self, arm: int, reward: float) -> None:
        self.counts[arm] += 1
        self.reward_sums[arm] += reward
        self.total_pulls += 1

    def empirical_means(self) -> np.ndarray:
        """
        Sample means, projected inside S for families with finite endpoints.

        Raises:
            DegenerateError: if some arm has never been pulled
        """
        if not self.all_pulled:
            unpulled = np.flatnonzero(self.counts == 0).tolist()
            raise DegenerateError(f"empirical mean undefined for unpulled arms {unpulled}")
        return self.instance.family.interior(self.reward_sums / self.counts)

    def snapshot(self) -> "SamplingState":
        """Independent copy, safe to hand to another thread"""
        return SamplingState(
            instance=self.instance,
            counts=self.counts.copy(),
            reward_sums=self.reward_sums.copy(),
            total_pulls=self.total_pulls,
        )


@dataclass(frozen=True, eq=False)
class IndexReport:
    """
    Empirical indexes at one iteration.

    ``indexes`` has one entry per arm, with +inf at the leader.
    """

    best_arm: int
    indexes: np.ndarray
    anchor_value: float
    min_index: float
    min_index_arm: int
    total_pulls: int = 0
    counts: Optional[np.ndarray] = None

    @classmethod
    def build(
        cls,
        best_arm: int,
        indexes: np.ndarray,
        anchor_value: float,
        total_pulls: int = 0,
        counts: Optional[np.ndarray] = None,
    ) -> "IndexReport":
        indexes = np.asarray(indexes, dtype=float)
        # argmin returns the first minimizer: lowest arm id on ties
        arm = int(np.argmin(indexes))
        return cls(
            best_arm=int(best_arm),
            indexes=indexes,
            anchor_value=float(anchor_value),
            min_index=float(indexes[arm]),
            min_index_arm=arm,
            total_pulls=int(total_pulls),
            counts=counts,
        )

    def challenger_indexes(self) -> Dict[int, float]:
        return {a: float(v) for a, v in enumerate(self.indexes) if a != self.best_arm}

    def normalized_indexes(self) -> Dict[int, float]:
        """H_a = index_a / N for every challenger"""
        if self.total_pulls <= 0:
            raise DegenerateError("normalized indexes need total_pulls > 0")
        return {a: v / self.total_pulls for a, v in self.challenger_indexes().items()}

    def to_dict(self) -> Dict[str, object]:
        return {
            "best_arm": self.best_arm,
            "indexes": self.challenger_indexes(),
            "anchor_value": self.anchor_value,
            "min_index": self.min_index,
            "min_index_arm": self.min_index_arm,
            "total_pulls": self.total_pulls,
        }


def empirical_report(instance: BanditInstance, state: SamplingState) -> IndexReport:
    """
    Evaluate leader, indexes and anchor at the empirical means.

    Args:
        instance: Bandit instance (supplies the family)
        state: Run statistics; every arm must have been pulled

    Returns:
        IndexReport with the lowest-id argmax as leader
    """
    means = state.empirical_means()
    best = int(np.argmax(means))
    indexes, ratios = pairwise_indexes(instance.family, means, state.counts, best)
    return IndexReport.build(
        best_arm=best,
        indexes=indexes,
        anchor_value=ratios.sum() - 1.0,
        total_pulls=state.total_pulls,
        counts=state.counts.copy(),
    )


def stopping_statistic(report: IndexReport) -> float:
    """GLLR statistic: the minimum challenger index"""
    return report.min_index
