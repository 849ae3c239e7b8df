"""
Bandit instance: a SPEF family plus the vector of true arm means.
"""

from dataclasses import dataclass, field
from typing import Dict, Sequence

import numpy as np

from anchored_bai.spef.families import GaussianKnownVariance, SpefFamily, parse_family
from anchored_bai.utils.errors import DomainError


@dataclass(frozen=True, eq=False)
class BanditInstance:
    """
    Ground-truth instance mu.

    Means are stored as a read-only numpy vector; the best arm must be unique.
    Arms keep their configured order, so the best arm need not be arm 0.
    """

    family: SpefFamily
    means: np.ndarray = field(repr=False)

    def __post_init__(self):
        means = np.array(self.means, dtype=float).ravel()
        if means.size < 2:
            raise DomainError(f"Need at least 2 arms, got {means.size}")
        self.family.check(means)
        top = means.max()
        if np.count_nonzero(means == top) != 1:
            raise DomainError(f"Best arm is not unique: means {means.tolist()}")
        means.setflags(write=False)
        object.__setattr__(self, "means", means)

    @classmethod
    def from_means(
        cls, means: Sequence[float], family: str = "gaussian", sigma: float = 1.0
    ) -> "BanditInstance":
        return cls(parse_family(family, sigma), np.asarray(means, dtype=float))

    @property
    def num_arms(self) -> int:
        return int(self.means.size)

    @property
    def best_arm(self) -> int:
        return int(np.argmax(self.means))

    @property
    def challengers(self) -> np.ndarray:
        """Arm ids other than the best, in increasing order"""
        return np.delete(np.arange(self.num_arms), self.best_arm)

    @property
    def gaps(self) -> np.ndarray:
        """Delta_a = mu_best - mu_a (0 for the best arm)"""
        return self.means[self.best_arm] - self.means

    @property
    def is_gaussian(self) -> bool:
        return isinstance(self.family, GaussianKnownVariance)

    def to_dict(self) -> Dict[str, object]:
        return {**self.family.to_dict(), "means": self.means.tolist()}

    def __repr__(self) -> str:
        return f"BanditInstance({self.family.name}, means={self.means.tolist()})"
