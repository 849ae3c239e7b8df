"""
Fluid dynamics of the anchored top-two rules.

Continuous allocations N_a evolve with the total N as time. The regime is
set by the sign of the anchor g:

- GPos   (g > 0): all mass to the leader, N_1' = 1
- GNeg   (g < 0): mass split over the minimum-index set B, N_b' = d_B / d_bb
- GZero  (g = 0): the state slides along the optimality manifold with B
                  holding the minimum indexes; closed-form RHS below
- Linear (g = 0, B = all challengers): N_a' = omega*_a

With x_a the weighted mid of (1, a), d_1a = d(mu_1, x_a), d_aa = d(mu_a, x_a)
and r_a = d_1a / d_aa:

    f_a  = r_a (d_2(mu_a, x_a) / d_aa - d_2(mu_1, x_a) / d_1a)
    h_a  = f_a N_1^2 Delta_a / (N_1 + N_a)^2
    h(B) = sum_B h_b / d_bb        h(N) = sum_{a not in B} h_a N_a
    d_B  = (sum_B 1 / d_bb)^-1
    D    = (N_1 + sum_B N_b) h(B) + h(N) / d_B

    N_1' = N_1 h(B) / D
    N_b' = (N_b h(B) + h(N) / d_bb) / D
    I_B' = (I_B h(B) + h(N)) / D

The beta-EB variant replaces the anchor by g_beta = beta - N_1 / N; on
g_beta = 0 the leader grows at rate beta and B shares the rest.
"""

from dataclasses import dataclass
from enum import Enum
from typing import Dict, NamedTuple, Optional, Tuple

import numpy as np

from anchored_bai.oracle.solver import solve_optimal
from anchored_bai.spef.instance import BanditInstance
from anchored_bai.utils.errors import RegimeError

# Looser than the event tolerance: RHS callers may hand in mid-step states
REGIME_TOL = 1e-6


class Regime(str, Enum):
    GPOS = "g_pos"
    GNEG = "g_neg"
    GZERO = "g_zero"
    LINEAR = "linear"


@dataclass(frozen=True, eq=False)
class FluidState:
    """Allocations with their regime, active set B, common index I_B and anchor g"""

    allocations: np.ndarray
    regime: Regime
    active: Tuple[int, ...] = ()
    common_index: float = float("nan")
    anchor: float = float("nan")

    @property
    def total(self) -> float:
        return float(self.allocations.sum())

    @property
    def proportions(self) -> np.ndarray:
        return self.allocations / self.total

    def to_dict(self) -> Dict[str, object]:
        return {
            "N": self.total,
            "allocations": self.allocations.tolist(),
            "regime": self.regime.value,
            "active": list(self.active),
            "common_index": self.common_index,
            "anchor": self.anchor,
        }


class PairTerms(NamedTuple):
    """Per-arm transport quantities against the true best arm (leader entries unused)"""

    x: np.ndarray
    d_lead: np.ndarray
    d_arm: np.ndarray
    indexes: np.ndarray
    ratios: np.ndarray


def pair_terms(instance: BanditInstance, allocations: np.ndarray) -> PairTerms:
    family = instance.family
    best = instance.best_arm
    means = instance.means
    n1 = allocations[best]
    mu1 = means[best]
    with np.errstate(divide="ignore", invalid="ignore"):
        x = (n1 * mu1 + allocations * means) / (n1 + allocations)
        d_lead = family.divergence(mu1, x)
        d_arm = family.divergence(means, x)
        indexes = n1 * d_lead + allocations * d_arm
        ratios = np.where(allocations > 0, d_lead / d_arm, 0.0)
    if n1 == 0:
        ratios = np.where(allocations > 0, np.inf, 0.0)
    indexes[best] = np.inf
    ratios[best] = 0.0
    return PairTerms(x, d_lead, d_arm, indexes, ratios)


def anchor_value(
    instance: BanditInstance, allocations: np.ndarray, beta: Optional[float] = None
) -> float:
    """g at the true means, or g_beta = beta - N_1 / N when beta is given"""
    if beta is not None:
        return beta - allocations[instance.best_arm] / allocations.sum()
    return float(pair_terms(instance, allocations).ratios.sum() - 1.0)


def minimum_index_set(indexes: np.ndarray, challengers: np.ndarray, tol: float) -> Tuple[int, ...]:
    """Challengers whose index is within tol * max(1, I_min) of the minimum"""
    values = indexes[challengers]
    low = values.min()
    return tuple(int(a) for a in challengers[values <= low + tol * max(1.0, abs(low))])


def classify(
    instance: BanditInstance,
    allocations: np.ndarray,
    beta: Optional[float] = None,
    tol: float = 1e-9,
) -> FluidState:
    """
    Initial regime of a fluid state from the sign of its anchor.

    |g| <= tol gives GZero with B the minimum-index set, or Linear when B
    holds every challenger.
    """
    allocations = np.asarray(allocations, dtype=float)
    if np.any(allocations < 0) or not allocations.sum() > 0:
        raise RegimeError(f"allocations must be nonnegative with positive total, got {allocations}")
    g = anchor_value(instance, allocations, beta)
    terms = pair_terms(instance, allocations)
    if g > tol:
        return FluidState(allocations, Regime.GPOS, (), float("nan"), g)

    active = minimum_index_set(terms.indexes, instance.challengers, tol)
    common = float(terms.indexes[list(active)].mean())
    if g < -tol:
        regime = Regime.GNEG
    elif len(active) == instance.num_arms - 1:
        regime = Regime.LINEAR
    else:
        regime = Regime.GZERO
    return FluidState(allocations, regime, active, common, g)


# ═══════════════════════════════════════════════════════════════════════════════
# Right-hand sides (unchecked, used by the integrator)
# ═══════════════════════════════════════════════════════════════════════════════


def _split(instance: BanditInstance, active: Tuple[int, ...]) -> Tuple[np.ndarray, np.ndarray]:
    arms = np.asarray(active, dtype=int)
    return arms, np.setdiff1d(instance.challengers, arms)


def _gzero_terms(instance: BanditInstance, allocations: np.ndarray, active: Tuple[int, ...]):
    family = instance.family
    best = instance.best_arm
    means = instance.means
    n1 = allocations[best]
    arms, outside = _split(instance, active)
    terms = pair_terms(instance, allocations)
    x, d_lead, d_arm = terms.x, terms.d_lead, terms.d_arm
    gaps = means[best] - means

    with np.errstate(divide="ignore", invalid="ignore"):
        f = terms.ratios * (
            family.divergence_d2(means, x) / d_arm - family.divergence_d2(means[best], x) / d_lead
        )
        h = f * n1**2 * gaps / (n1 + allocations) ** 2
    # Unallocated outside arms carry no weight in h(N)
    h = np.where(allocations > 0, h, 0.0)

    h_b = float(np.sum(h[arms] / d_arm[arms]))
    h_n = float(np.sum(h[outside] * allocations[outside]))
    d_b = 1.0 / float(np.sum(1.0 / d_arm[arms]))
    denom = (n1 + allocations[arms].sum()) * h_b + h_n / d_b
    return arms, terms, h_b, h_n, d_b, denom


def gzero_derivatives(
    instance: BanditInstance, allocations: np.ndarray, active: Tuple[int, ...]
) -> Tuple[np.ndarray, float]:
    """(N', I_B') on the optimality manifold with active set B"""
    arms, terms, h_b, h_n, d_b, denom = _gzero_terms(instance, allocations, active)
    deriv = np.zeros(instance.num_arms)
    deriv[instance.best_arm] = allocations[instance.best_arm] * h_b / denom
    deriv[arms] = (allocations[arms] * h_b + h_n / terms.d_arm[arms]) / denom
    common = float(terms.indexes[arms].mean())
    return deriv, (common * h_b + h_n) / denom


def gneg_derivatives(
    instance: BanditInstance, allocations: np.ndarray, active: Tuple[int, ...]
) -> Tuple[np.ndarray, float]:
    """(N', I_B') while g < 0: N_b' = d_B / d_bb, I_B' = d_B"""
    arms = np.asarray(active, dtype=int)
    d_arm = pair_terms(instance, allocations).d_arm[arms]
    d_b = 1.0 / float(np.sum(1.0 / d_arm))
    deriv = np.zeros(instance.num_arms)
    deriv[arms] = d_b / d_arm
    return deriv, d_b


def beta_gzero_derivatives(
    instance: BanditInstance, allocations: np.ndarray, active: Tuple[int, ...], beta: float
) -> Tuple[np.ndarray, float]:
    """(N', I_B') of the beta-EB fluid on g_beta = 0"""
    arms = np.asarray(active, dtype=int)
    total = allocations.sum()
    terms = pair_terms(instance, allocations)
    d_arm = terms.d_arm[arms]
    d_b = 1.0 / float(np.sum(1.0 / d_arm))
    mass_b = allocations[arms].sum()
    deriv = np.zeros(instance.num_arms)
    deriv[instance.best_arm] = beta
    deriv[arms] = (((1.0 - beta) * total - mass_b) * d_b + allocations[arms] * d_arm) / (
        total * d_arm
    )
    common = float(terms.indexes[arms].mean())
    index_rate = (1.0 - beta - mass_b / total) * d_b + common / total
    return deriv, index_rate


def derivatives(
    instance: BanditInstance,
    allocations: np.ndarray,
    regime: Regime,
    active: Tuple[int, ...],
    beta: Optional[float] = None,
    omega: Optional[np.ndarray] = None,
) -> np.ndarray:
    """N' for a regime; omega is required in the Linear regime"""
    if regime is Regime.GPOS:
        deriv = np.zeros(instance.num_arms)
        deriv[instance.best_arm] = 1.0
        return deriv
    if regime is Regime.GNEG:
        return gneg_derivatives(instance, allocations, active)[0]
    if regime is Regime.GZERO:
        if beta is None:
            return gzero_derivatives(instance, allocations, active)[0]
        return beta_gzero_derivatives(instance, allocations, active, beta)[0]
    if omega is None:
        raise RegimeError("Linear regime needs the optimal proportions")
    return np.array(omega, dtype=float)


# ═══════════════════════════════════════════════════════════════════════════════
# Checked public right-hand sides
# ═══════════════════════════════════════════════════════════════════════════════


def _check_state(instance: BanditInstance, state: FluidState, beta: Optional[float] = None) -> None:
    regime = state.regime
    g = anchor_value(instance, state.allocations, beta)
    if regime is Regime.GPOS:
        if g < -REGIME_TOL:
            raise RegimeError(f"GPos state has g = {g}")
        return
    if not state.active:
        raise RegimeError(f"{regime.value} state needs a non-empty active set")
    if not set(state.active) <= set(instance.challengers.tolist()):
        raise RegimeError(f"active set {state.active} must contain challengers only")
    indexes = pair_terms(instance, state.allocations).indexes
    inside = indexes[list(state.active)]
    scale = max(1.0, float(inside.max()))
    if np.ptp(inside) > REGIME_TOL * scale:
        raise RegimeError(f"indexes of B differ: {inside.tolist()}")
    if regime is Regime.GNEG and g > REGIME_TOL:
        raise RegimeError(f"GNeg state has g = {g}")
    if regime in (Regime.GZERO, Regime.LINEAR):
        if abs(g) > REGIME_TOL:
            raise RegimeError(f"{regime.value} state has g = {g}")
        _, outside = _split(instance, state.active)
        if outside.size and indexes[outside].min() < inside.max() - REGIME_TOL * scale:
            raise RegimeError("an index outside B is below the common index")
    if regime is Regime.LINEAR and len(state.active) != instance.num_arms - 1:
        raise RegimeError("Linear regime needs B = all challengers")


def fluid_rhs(
    instance: BanditInstance, state: FluidState, omega: Optional[np.ndarray] = None
) -> np.ndarray:
    """
    Derivatives N_a' of the fluid dynamics at ``state``.

    Args:
        instance: Bandit instance
        state: Fluid state with a consistent regime tag
        omega: Optimal proportions for the Linear regime (solved when omitted)

    Returns:
        Vector of derivatives summing to 1

    Raises:
        RegimeError: if the state violates its regime's invariants
    """
    _check_state(instance, state)
    if state.regime is Regime.LINEAR and omega is None:
        omega = solve_optimal(instance).omega
    return derivatives(instance, state.allocations, state.regime, state.active, omega=omega)


def index_rhs(instance: BanditInstance, state: FluidState) -> Tuple[float, Dict[int, float]]:
    """
    Rates of the indexes: I_B' and I_a' for the arms outside B.

    In GPos every challenger is reported with I_a' = d(mu_1, x_1a) and I_B'
    is nan.
    """
    _check_state(instance, state)
    terms = pair_terms(instance, state.allocations)
    best = instance.best_arm
    if state.regime is Regime.GPOS:
        return float("nan"), {int(a): float(terms.d_lead[a]) for a in instance.challengers}

    if state.regime is Regime.GNEG:
        deriv, rate = gneg_derivatives(instance, state.allocations, state.active)
    else:
        deriv, rate = gzero_derivatives(instance, state.allocations, state.active)
    _, outside = _split(instance, state.active)
    return rate, {int(a): float(deriv[best] * terms.d_lead[a]) for a in outside}


def beta_fluid_rhs(
    instance: BanditInstance, state: FluidState, beta: float
) -> Tuple[np.ndarray, float]:
    """
    beta-EB fluid derivatives on g_beta = 0.

    Returns:
        (N', I_B'); N_1' = beta and the derivatives sum to 1

    Raises:
        RegimeError: if N_1 differs from beta * N
    """
    if not 0.0 < beta < 1.0:
        raise RegimeError(f"beta must lie in (0, 1), got {beta}")
    allocations = state.allocations
    total = allocations.sum()
    n1 = allocations[instance.best_arm]
    if abs(n1 - beta * total) > REGIME_TOL * total:
        raise RegimeError(f"beta anchor violated: N_1 = {n1}, beta N = {beta * total}")
    if not state.active:
        raise RegimeError("beta fluid needs a non-empty active set")
    return beta_gzero_derivatives(instance, allocations, state.active, beta)
