from .dynamics import (
    FluidState,
    Regime,
    anchor_value,
    beta_fluid_rhs,
    classify,
    fluid_rhs,
    index_rhs,
    pair_terms,
)
from .integrator import EventKind, FluidControls, FluidEvent, FluidTrajectory, integrate

__all__ = [
    "EventKind",
    "FluidControls",
    "FluidEvent",
    "FluidState",
    "FluidTrajectory",
    "Regime",
    "anchor_value",
    "beta_fluid_rhs",
    "classify",
    "fluid_rhs",
    "index_rhs",
    "integrate",
    "pair_terms",
]
