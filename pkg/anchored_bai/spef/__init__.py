from .families import (
    BOUNDARY_GUARD,
    FAMILIES,
    Bernoulli,
    Exponential,
    GaussianKnownVariance,
    Poisson,
    SpefFamily,
    kl,
    kl_d1,
    kl_d2,
    parse_family,
    sample,
)
from .instance import BanditInstance

__all__ = [
    "BOUNDARY_GUARD",
    "FAMILIES",
    "BanditInstance",
    "Bernoulli",
    "Exponential",
    "GaussianKnownVariance",
    "Poisson",
    "SpefFamily",
    "kl",
    "kl_d1",
    "kl_d2",
    "parse_family",
    "sample",
]
