"""
Single-parameter exponential families (SPEF), parametrized by their mean.

Each family carries its open mean interval S = (mu_inf, mu_sup), the KL
divergence d(mu, x) between the members with means mu and x (in nats), its
two partial derivatives, the natural parameter theta_mu, the variance
b''(theta_mu) and a sampler.

Closed forms:
- GaussianKnownVariance: d = (mu - x)^2 / (2 sigma^2)
- Bernoulli:             d = mu ln(mu/x) + (1-mu) ln((1-mu)/(1-x))
- Poisson:               d = x - mu + mu ln(mu/x)
- Exponential (mean):    d = ln(x/mu) + mu/x - 1

For every family d_1(mu, x) = theta_mu - theta_x and
d_2(mu, x) = (x - mu) / b''(theta_x).

Usage:
    from anchored_bai.spef import Bernoulli, kl

    kl(Bernoulli(), 0.3, 0.5)   # 0.0823...
"""

import math
from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import ClassVar, Dict, Optional, Tuple, Type, Union

import numpy as np
from numpy.random import Generator

from anchored_bai.utils.errors import DomainError

ArrayLike = Union[float, np.ndarray]

# Means closer than this to a finite endpoint of S are rejected
BOUNDARY_GUARD = 1e-12


def _scalar_or_array(value: np.ndarray) -> ArrayLike:
    return float(value) if np.ndim(value) == 0 else value


@dataclass(frozen=True)
class SpefFamily(ABC):
    """Base class for a mean-parametrized single-parameter exponential family."""

    name: ClassVar[str]
    mu_inf: ClassVar[float]
    mu_sup: ClassVar[float]

    # ─────────────────────────────────────────────────────────────────────────
    # Domain
    # ─────────────────────────────────────────────────────────────────────────

    def contains(self, values: ArrayLike) -> np.ndarray:
        """Elementwise membership in the guarded open interval S"""
        arr = np.asarray(values, dtype=float)
        inside = np.isfinite(arr)
        if math.isfinite(self.mu_inf):
            inside &= arr > self.mu_inf + BOUNDARY_GUARD
        if math.isfinite(self.mu_sup):
            inside &= arr < self.mu_sup - BOUNDARY_GUARD
        return inside

    def check(self, *values: ArrayLike) -> None:
        """Raise DomainError unless every value lies inside S"""
        for value in values:
            if not np.all(self.contains(value)):
                raise DomainError(
                    f"{self.name}: mean(s) {value!r} outside "
                    f"({self.mu_inf}, {self.mu_sup})"
                )

    def interior(self, values: ArrayLike) -> np.ndarray:
        """Project values onto the guarded interior of S"""
        lo = self.mu_inf + 2 * BOUNDARY_GUARD if math.isfinite(self.mu_inf) else -np.inf
        hi = self.mu_sup - 2 * BOUNDARY_GUARD if math.isfinite(self.mu_sup) else np.inf
        return np.clip(np.asarray(values, dtype=float), lo, hi)

    # ─────────────────────────────────────────────────────────────────────────
    # Divergence and derivatives (unchecked, vectorized)
    # ─────────────────────────────────────────────────────────────────────────

    @abstractmethod
    def divergence(self, mu: ArrayLike, x: ArrayLike) -> np.ndarray:
        """d(mu, x) without domain checks"""

    @abstractmethod
    def theta(self, mu: ArrayLike) -> np.ndarray:
        """Natural parameter theta_mu"""

    @abstractmethod
    def variance(self, mu: ArrayLike) -> np.ndarray:
        """Variance b''(theta_mu) of the member with mean mu"""

    def divergence_d1(self, mu: ArrayLike, x: ArrayLike) -> np.ndarray:
        return self.theta(mu) - self.theta(x)

    def divergence_d2(self, mu: ArrayLike, x: ArrayLike) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return (x - mu) / self.variance(x)

    @abstractmethod
    def variance_bounds(self, lo: float, hi: float) -> Tuple[float, float]:
        """(sigma_min, sigma_max): extrema of the variance on [lo, hi]"""

    # ─────────────────────────────────────────────────────────────────────────
    # Sampling
    # ─────────────────────────────────────────────────────────────────────────

    @abstractmethod
    def draw(self, mu: float, rng: Generator, size: Optional[int] = None) -> ArrayLike:
        """Reward draw(s) without domain checks"""

    def to_dict(self) -> Dict[str, object]:
        return {"family": self.name}


@dataclass(frozen=True)
class GaussianKnownVariance(SpefFamily):
    """Gaussian rewards with known standard deviation sigma (default 1)."""

    sigma: float = 1.0

    name: ClassVar[str] = "gaussian"
    mu_inf: ClassVar[float] = -math.inf
    mu_sup: ClassVar[float] = math.inf

    def __post_init__(self):
        if not (self.sigma > 0 and math.isfinite(self.sigma)):
            raise DomainError(f"Gaussian sigma must be positive, got {self.sigma}")

    def divergence(self, mu, x):
        diff = np.asarray(mu, dtype=float) - x
        return diff * diff / (2.0 * self.sigma**2)

    def theta(self, mu):
        return np.asarray(mu, dtype=float) / self.sigma**2

    def variance(self, mu):
        return np.full_like(np.asarray(mu, dtype=float), self.sigma**2)

    def variance_bounds(self, lo, hi):
        return self.sigma**2, self.sigma**2

    def draw(self, mu, rng, size=None):
        return rng.normal(mu, self.sigma, size)

    def to_dict(self):
        return {"family": self.name, "sigma": self.sigma}


@dataclass(frozen=True)
class Bernoulli(SpefFamily):
    name: ClassVar[str] = "bernoulli"
    mu_inf: ClassVar[float] = 0.0
    mu_sup: ClassVar[float] = 1.0

    def divergence(self, mu, x):
        mu = np.asarray(mu, dtype=float)
        x = np.asarray(x, dtype=float)
        return mu * np.log(mu / x) + (1.0 - mu) * np.log((1.0 - mu) / (1.0 - x))

    def theta(self, mu):
        mu = np.asarray(mu, dtype=float)
        return np.log(mu / (1.0 - mu))

    def variance(self, mu):
        mu = np.asarray(mu, dtype=float)
        return mu * (1.0 - mu)

    def variance_bounds(self, lo, hi):
        v_lo, v_hi = lo * (1 - lo), hi * (1 - hi)
        top = 0.25 if lo <= 0.5 <= hi else max(v_lo, v_hi)
        return min(v_lo, v_hi), top

    def draw(self, mu, rng, size=None):
        if size is None:
            return float(rng.random() < mu)
        return (rng.random(size) < mu).astype(float)


@dataclass(frozen=True)
class Poisson(SpefFamily):
    name: ClassVar[str] = "poisson"
    mu_inf: ClassVar[float] = 0.0
    mu_sup: ClassVar[float] = math.inf

    def divergence(self, mu, x):
        mu = np.asarray(mu, dtype=float)
        return x - mu + mu * np.log(mu / x)

    def theta(self, mu):
        return np.log(np.asarray(mu, dtype=float))

    def variance(self, mu):
        return np.asarray(mu, dtype=float)

    def variance_bounds(self, lo, hi):
        return lo, hi

    def draw(self, mu, rng, size=None):
        out = rng.poisson(mu, size)
        return float(out) if size is None else out.astype(float)


@dataclass(frozen=True)
class Exponential(SpefFamily):
    """Exponential rewards parametrized by their mean (scale)."""

    name: ClassVar[str] = "exponential"
    mu_inf: ClassVar[float] = 0.0
    mu_sup: ClassVar[float] = math.inf

    def divergence(self, mu, x):
        ratio = np.asarray(mu, dtype=float) / x
        return ratio - 1.0 - np.log(ratio)

    def theta(self, mu):
        return -1.0 / np.asarray(mu, dtype=float)

    def variance(self, mu):
        mu = np.asarray(mu, dtype=float)
        return mu * mu

    def variance_bounds(self, lo, hi):
        return lo * lo, hi * hi

    def draw(self, mu, rng, size=None):
        return rng.exponential(mu, size)


FAMILIES: Dict[str, Type[SpefFamily]] = {
    cls.name: cls for cls in (GaussianKnownVariance, Bernoulli, Poisson, Exponential)
}


def parse_family(name: str, sigma: float = 1.0) -> SpefFamily:
    """Build a family from its config name (gaussian|bernoulli|poisson|exponential)"""
    key = name.strip().lower()
    if key not in FAMILIES:
        raise DomainError(f"Unknown family '{name}', expected one of {sorted(FAMILIES)}")
    if key == GaussianKnownVariance.name:
        return GaussianKnownVariance(sigma=sigma)
    return FAMILIES[key]()


# ═══════════════════════════════════════════════════════════════════════════════
# Checked public operations
# ═══════════════════════════════════════════════════════════════════════════════


def kl(family: SpefFamily, mu: ArrayLike, x: ArrayLike) -> ArrayLike:
    """d(mu, x) >= 0 in nats; zero iff mu == x"""
    family.check(mu, x)
    return _scalar_or_array(family.divergence(mu, x))


def kl_d1(family: SpefFamily, mu: ArrayLike, x: ArrayLike) -> ArrayLike:
    """Partial derivative of d in its first argument"""
    family.check(mu, x)
    return _scalar_or_array(family.divergence_d1(mu, x))


def kl_d2(family: SpefFamily, mu: ArrayLike, x: ArrayLike) -> ArrayLike:
    """Partial derivative of d in its second argument; sign of (x - mu)"""
    family.check(mu, x)
    return _scalar_or_array(family.divergence_d2(mu, x))


def sample(family: SpefFamily, mu: float, rng_stream: Generator) -> float:
    """One reward from the member with mean mu, drawn from rng_stream"""
    family.check(mu)
    return float(family.draw(mu, rng_stream))
