"""
Bracketed root finding for the monotone maps of the oracle.

Every solve in the oracle is a scalar root of a strictly monotone function
on an interval (lower_limit, upper_limit). bracket_monotone walks away from
a starting guess with geometrically growing steps until the sign changes,
then find_root hands the bracket to scipy (bisect by default, brentq when
Settings.root_method says so).
"""

import logging
import math
from typing import Callable, Optional, Tuple

from scipy import optimize

from anchored_bai.config.settings import get_settings
from anchored_bai.utils.errors import ConvergenceError

logger = logging.getLogger(__name__)

# Tightest relative tolerance scipy accepts for brentq / bisect
RTOL = 4.0 * 2.220446049250313e-16
MAX_BRACKET_STEPS = 2200
MAX_ITER = 1000


def bracket_monotone(
    func: Callable[[float], float],
    guess: float,
    lower_limit: float = 0.0,
    upper_limit: float = math.inf,
    increasing: bool = True,
    first_step: float = 1.0,
) -> Tuple[float, float]:
    """
    Find lo < hi inside (lower_limit, upper_limit) with func changing sign.

    Args:
        func: Strictly monotone on the open interval
        guess: Starting point inside the interval
        lower_limit: Open lower end of the domain
        upper_limit: Open upper end of the domain (may be inf)
        increasing: Direction of monotonicity
        first_step: First step relative to |guess|; small for warm starts

    Returns:
        (lo, hi); lo == hi when func(guess) is exactly zero
    """
    sign = 1.0 if increasing else -1.0

    def f(x: float) -> float:
        return sign * func(x)

    value = f(guess)
    if value == 0.0:
        return guess, guess

    step = max(abs(guess), 1e-300) * first_step
    cur = guess
    for _ in range(MAX_BRACKET_STEPS):
        if value < 0:
            # root lies above cur
            nxt = cur + step
            if nxt >= upper_limit:
                nxt = upper_limit - (upper_limit - cur) / 2.0
            if nxt == cur:
                break
            nxt_value = f(nxt)
            if nxt_value >= 0:
                return cur, nxt
        else:
            nxt = cur - step
            if nxt <= lower_limit:
                nxt = lower_limit + (cur - lower_limit) / 2.0
            if nxt == cur:
                break
            nxt_value = f(nxt)
            if nxt_value <= 0:
                return nxt, cur
        cur, value = nxt, nxt_value
        step *= 2.0

    raise ConvergenceError(
        "could not bracket a root",
        residuals={"last_point": cur, "last_value": sign * value},
    )


def find_root(
    func: Callable[[float], float],
    lo: float,
    hi: float,
    method: Optional[str] = None,
) -> float:
    """Root of func on a sign-changing bracket, to near machine precision"""
    if lo == hi:
        return lo
    method = (method or get_settings().root_method).lower()
    solver = {"brentq": optimize.brentq, "bisect": optimize.bisect}.get(method)
    if solver is None:
        raise ValueError(f"Unknown root method '{method}', expected brentq or bisect")
    try:
        return float(solver(func, lo, hi, xtol=1e-300, rtol=RTOL, maxiter=MAX_ITER))
    except (RuntimeError, ValueError) as exc:
        raise ConvergenceError(
            f"{method} failed on [{lo!r}, {hi!r}]: {exc}",
            residuals={"lo": lo, "hi": hi, "f_lo": func(lo), "f_hi": func(hi)},
        ) from exc


def solve_monotone(
    func: Callable[[float], float],
    guess: float,
    lower_limit: float = 0.0,
    upper_limit: float = math.inf,
    increasing: bool = True,
    first_step: float = 1.0,
) -> float:
    """Bracket then solve a strictly monotone scalar equation func(x) = 0"""
    lo, hi = bracket_monotone(func, guess, lower_limit, upper_limit, increasing, first_step)
    logger.debug("bracket [%.6g, %.6g] from guess %.6g", lo, hi, guess)
    return find_root(func, lo, hi)
