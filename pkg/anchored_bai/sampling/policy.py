"""
Sampling policies and stopping thresholds.

Policies:
- AT2:          anchor > 0 -> empirical leader, else the smallest-index challenger
- IAT2:         as AT2, challenger minimizes index + ln(count)
- beta-EB-TCB:  leader with probability beta, else the smallest-index challenger
- beta-EB-ITCB: as beta-EB-TCB with the IAT2 challenger

All four share the N^alpha forced-exploration rule.

Thresholds beta(N, delta):
- GK16: log((1 + log N) / delta)
- KK21: log((K-1)/delta) + 6 log(log(N/2) + 1) + 8 log(1 + 2 log((K-1)/delta))
"""

import math
import re
from dataclasses import dataclass
from enum import Enum
from typing import Dict, Optional

from anchored_bai.utils.errors import DomainError


class PolicyKind(str, Enum):
    AT2 = "at2"
    IAT2 = "iat2"
    BETA_EB = "beta-eb"


class ThresholdStyle(str, Enum):
    GK16 = "gk16"
    KK21 = "kk21"

    @classmethod
    def parse(cls, text: str) -> "ThresholdStyle":
        try:
            return cls(text.strip().lower())
        except ValueError:
            raise DomainError(
                f"Unknown threshold '{text}', expected one of {[s.value for s in cls]}"
            ) from None


_BETA_EB_PATTERN = re.compile(
    r"^(?:eb-(?P<kind1>i?tcbi?):(?P<beta1>[0-9.]+)|(?P<beta2>[0-9.]+)-eb-(?P<kind2>i?tcbi?))$"
)


@dataclass(frozen=True)
class Policy:
    """
    A sampling rule with its exploration exponent.

    Args:
        kind: AT2, IAT2 or BETA_EB
        alpha: Forced-exploration exponent in (0, 1)
        beta: Leader probability in (0, 1), BETA_EB only
        improved: BETA_EB only; use the index + ln(count) challenger
    """

    kind: PolicyKind
    alpha: float = 0.5
    beta: Optional[float] = None
    improved: bool = False

    def __post_init__(self):
        self._validate()

    def _validate(self):
        if not 0.0 < self.alpha < 1.0:
            raise DomainError(f"alpha must lie in (0, 1), got {self.alpha}")
        if self.kind is PolicyKind.BETA_EB:
            if self.beta is None or not 0.0 < self.beta < 1.0:
                raise DomainError(f"beta must lie in (0, 1), got {self.beta}")
        elif self.beta is not None or self.improved:
            raise DomainError(f"{self.kind.value} takes neither beta nor the improved flag")

    @classmethod
    def at2(cls, alpha: float = 0.5) -> "Policy":
        return cls(PolicyKind.AT2, alpha)

    @classmethod
    def iat2(cls, alpha: float = 0.5) -> "Policy":
        return cls(PolicyKind.IAT2, alpha)

    @classmethod
    def beta_eb(cls, beta: float, improved: bool = False, alpha: float = 0.5) -> "Policy":
        return cls(PolicyKind.BETA_EB, alpha, beta=beta, improved=improved)

    @classmethod
    def parse(cls, text: str, alpha: float = 0.5) -> "Policy":
        """
        Parse a policy name.

        Accepts ``at2``, ``iat2``, ``eb-tcb:<beta>``, ``eb-itcb:<beta>`` and the
        display forms ``<beta>-EB-TCB`` / ``<beta>-EB-ITCB`` (``TCBI`` is read
        as ``ITCB``), case-insensitively.
        """
        key = text.strip().lower()
        if key == PolicyKind.AT2.value:
            return cls.at2(alpha)
        if key == PolicyKind.IAT2.value:
            return cls.iat2(alpha)
        match = _BETA_EB_PATTERN.match(key)
        if match is None:
            raise DomainError(
                f"Unknown policy '{text}', expected at2, iat2, eb-tcb:<beta> or eb-itcb:<beta>"
            )
        kind = match.group("kind1") or match.group("kind2")
        beta_text = match.group("beta1") or match.group("beta2")
        try:
            beta = float(beta_text)
        except ValueError:
            raise DomainError(f"Invalid beta in policy '{text}'") from None
        return cls.beta_eb(beta, improved=kind != "tcb", alpha=alpha)

    @property
    def name(self) -> str:
        if self.kind is PolicyKind.AT2:
            return "AT2"
        if self.kind is PolicyKind.IAT2:
            return "IAT2"
        return f"{self.beta:g}-EB-{'ITCB' if self.improved else 'TCB'}"

    @property
    def uses_coin(self) -> bool:
        return self.kind is PolicyKind.BETA_EB

    @property
    def improved_challenger(self) -> bool:
        """Challenger minimizes index + ln(count) instead of the index"""
        return self.kind is PolicyKind.IAT2 or self.improved

    def to_dict(self) -> Dict[str, object]:
        return {
            "name": self.name,
            "kind": self.kind.value,
            "alpha": self.alpha,
            "beta": self.beta,
            "improved": self.improved_challenger,
        }


def threshold(style: ThresholdStyle, n: int, delta: float, num_arms: int = 2) -> float:
    """
    Stopping threshold beta(N, delta).

    Args:
        style: GK16 or KK21
        n: Number of pulls N >= 1
        delta: Confidence level in (0, 1)
        num_arms: K, used by KK21

    Returns:
        Threshold in nats
    """
    if not 0.0 < delta < 1.0:
        raise DomainError(f"delta must lie in (0, 1), got {delta}")
    if n < 1:
        raise DomainError(f"threshold needs N >= 1, got {n}")
    if style is ThresholdStyle.GK16:
        return math.log((1.0 + math.log(n)) / delta)
    if num_arms < 2:
        raise DomainError(f"KK21 threshold needs K >= 2, got {num_arms}")
    base = math.log((num_arms - 1) / delta)
    return base + 6.0 * math.log(math.log(n / 2.0) + 1.0) + 8.0 * math.log(1.0 + 2.0 * base)
