"""
Exception hierarchy for the toolkit.

Every error raised on purpose derives from BaiError so callers (the CLI in
particular) can separate configuration problems from numerical failures.
"""

from typing import Any, Dict, Optional


class BaiError(Exception):
    """Base class for all toolkit errors"""


class DomainError(BaiError, ValueError):
    """A mean or argument lies outside the family's open mean interval S"""


class DegenerateError(BaiError, ValueError):
    """Zero total weight, or statistics requested for an unpulled arm"""


class InfeasibleError(BaiError, ValueError):
    """A target index cannot be reached at finite allocation"""


class RegimeError(BaiError, ValueError):
    """A fluid state is inconsistent with its regime tag"""


class MissingCoinError(BaiError, ValueError):
    """A randomized policy was asked to choose without a uniform draw"""


class BudgetError(BaiError, ValueError):
    """A brute-force search exceeds the configured lattice budget"""


class ConfigError(BaiError, ValueError):
    """Invalid experiment configuration or command-line overrides"""


class ConvergenceError(BaiError, RuntimeError):
    """A root solve or integration failed; carries the last residuals"""

    def __init__(self, message: str, residuals: Optional[Dict[str, Any]] = None):
        super().__init__(message)
        self.residuals = residuals or {}
