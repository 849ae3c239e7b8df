from .errors import (
    BaiError,
    BudgetError,
    ConfigError,
    ConvergenceError,
    DegenerateError,
    DomainError,
    InfeasibleError,
    MissingCoinError,
    RegimeError,
)
from .logger import get_logger
from .rng import StreamRole, substream

__all__ = [
    "BaiError",
    "BudgetError",
    "ConfigError",
    "ConvergenceError",
    "DegenerateError",
    "DomainError",
    "InfeasibleError",
    "MissingCoinError",
    "RegimeError",
    "StreamRole",
    "get_logger",
    "substream",
]
