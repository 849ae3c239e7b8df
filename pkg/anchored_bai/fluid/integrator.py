"""
Event-driven integrator for the fluid dynamics.

The total N is the time variable. Each step advances the allocations by
classical RK4 with dN = step_fraction * N in the current regime, then checks
the regime events:

- anchor_zero: g (or g_beta) reaches 0 from either side; the regime becomes
  GZero with B the minimum-index set
- catch_up:    an index outside B reaches I_B; the arm joins B
- stable:      B holds every challenger on g = 0; the regime becomes Linear

A step that triggers an event is shortened by bisection until the event
position is known to locate_tol in N. Coinciding events are processed anchor
first, then catch-ups, all logged at the same N. States on g = 0 are pulled
back onto the optimality manifold through the oracle whenever the drift
exceeds project_tol.
"""

import json
import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, List, Optional, Tuple

import numpy as np
import pandas as pd

from anchored_bai.config.settings import get_settings
from anchored_bai.fluid.dynamics import (
    FluidState,
    Regime,
    anchor_value,
    classify,
    derivatives,
    minimum_index_set,
    pair_terms,
)
from anchored_bai.oracle.solver import (
    solve_beta_optimal,
    solve_common_index_fixed_n1,
    solve_constrained_total,
    solve_optimal,
)
from anchored_bai.spef.instance import BanditInstance
from anchored_bai.utils.errors import BaiError, ConvergenceError, DomainError

logger = logging.getLogger(__name__)

EPS = np.finfo(float).eps


class EventKind(str, Enum):
    ANCHOR_ZERO = "anchor_zero"
    CATCH_UP = "catch_up"
    STABLE = "stable"


@dataclass(frozen=True)
class FluidEvent:
    total: float
    kind: EventKind
    arms: Tuple[int, ...]

    def to_dict(self) -> Dict[str, object]:
        return {"N": self.total, "kind": self.kind.value, "arms": list(self.arms)}


@dataclass
class FluidControls:
    """
    Integration controls.

    Args:
        step_fraction: Step dN as a fraction of N (Settings.fluid_step_fraction)
        event_tol: Event function tolerance (Settings.event_tol)
        locate_tol: Bisection tolerance on the event position in N
        sample_every: Record one state every this many steps (events always recorded)
        beta: None for the anchored dynamics; beta in (0, 1) for the beta-EB fluid
        project_tol: Manifold drift that triggers a re-projection
    """

    step_fraction: Optional[float] = None
    event_tol: Optional[float] = None
    locate_tol: float = 1e-10
    sample_every: int = 1
    beta: Optional[float] = None
    project_tol: float = 1e-12

    def __post_init__(self):
        settings = get_settings()
        if self.step_fraction is None:
            self.step_fraction = settings.fluid_step_fraction
        if self.event_tol is None:
            self.event_tol = settings.event_tol
        if not 0.0 < self.step_fraction <= 0.1:
            raise DomainError(f"step_fraction must lie in (0, 0.1], got {self.step_fraction}")
        if self.sample_every < 1:
            raise DomainError(f"sample_every must be >= 1, got {self.sample_every}")
        if self.beta is not None and not 0.0 < self.beta < 1.0:
            raise DomainError(f"beta must lie in (0, 1), got {self.beta}")

    def to_dict(self) -> Dict[str, object]:
        return {
            "step_fraction": self.step_fraction,
            "event_tol": self.event_tol,
            "locate_tol": self.locate_tol,
            "sample_every": self.sample_every,
            "beta": self.beta,
            "project_tol": self.project_tol,
        }


@dataclass
class FluidTrajectory:
    """Sampled states and the ordered event log of one integration"""

    num_arms: int
    samples: List[FluidState] = field(default_factory=list)
    events: List[FluidEvent] = field(default_factory=list)
    beta: Optional[float] = None

    @property
    def totals(self) -> np.ndarray:
        return np.array([s.total for s in self.samples])

    @property
    def final(self) -> FluidState:
        return self.samples[-1]

    @property
    def stability_total(self) -> Optional[float]:
        """N at which the Linear regime was entered, None if never"""
        for event in self.events:
            if event.kind is EventKind.STABLE:
                return event.total
        return None

    def to_frame(self) -> pd.DataFrame:
        """One row per sample: N, N_<a> per arm, g, I_B, regime"""
        rows = [
            [s.total, *s.allocations.tolist(), s.anchor, s.common_index, s.regime.value]
            for s in self.samples
        ]
        columns = ["N", *[f"N_{a}" for a in range(self.num_arms)], "g", "I_B", "regime"]
        return pd.DataFrame(rows, columns=columns)

    def events_to_json(self) -> str:
        return json.dumps([e.to_dict() for e in self.events], indent=2)


class _Integrator:
    """Mutable integration state; one instance per trajectory"""

    def __init__(self, instance: BanditInstance, controls: FluidControls):
        self.instance = instance
        self.controls = controls
        self.beta = controls.beta
        self.omega: Optional[np.ndarray] = None
        self.allocations = np.zeros(instance.num_arms)
        self.regime = Regime.GPOS
        self.active: Tuple[int, ...] = ()

    # ─────────────────────────────────────────────────────────────────────────
    # Helpers
    # ─────────────────────────────────────────────────────────────────────────

    @property
    def total(self) -> float:
        return float(self.allocations.sum())

    def optimal_proportions(self) -> np.ndarray:
        if self.omega is None:
            if self.beta is None:
                self.omega = solve_optimal(self.instance).omega
            else:
                self.omega = solve_beta_optimal(self.instance, self.beta).omega
        return self.omega

    def snapshot(self) -> FluidState:
        indexes = pair_terms(self.instance, self.allocations).indexes
        common = float(indexes[list(self.active)].mean()) if self.active else float("nan")
        return FluidState(
            allocations=self.allocations.copy(),
            regime=self.regime,
            active=self.active,
            common_index=common,
            anchor=anchor_value(self.instance, self.allocations, self.beta),
        )

    def rk4(self, allocations: np.ndarray, step: float) -> np.ndarray:
        if self.regime is Regime.LINEAR:
            return allocations + step * self.optimal_proportions()

        def rhs(y: np.ndarray) -> np.ndarray:
            return derivatives(self.instance, y, self.regime, self.active, self.beta, self.omega)

        k1 = rhs(allocations)
        k2 = rhs(allocations + 0.5 * step * k1)
        k3 = rhs(allocations + 0.5 * step * k2)
        k4 = rhs(allocations + step * k3)
        return allocations + step / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)

    def outside(self) -> np.ndarray:
        return np.setdiff1d(self.instance.challengers, np.asarray(self.active, dtype=int))

    def catch_up_gap(self, allocations: np.ndarray) -> Tuple[float, float]:
        """(min outside index - I_B, I_B); gap is +inf with no outside arms"""
        indexes = pair_terms(self.instance, allocations).indexes
        common = float(indexes[list(self.active)].mean())
        outside = self.outside()
        if outside.size == 0:
            return np.inf, common
        return float(indexes[outside].min()) - common, common

    def fired(self, allocations: np.ndarray) -> Tuple[bool, bool]:
        """(anchor event, catch-up event) at a candidate state"""
        tol = self.controls.event_tol
        anchor_event = False
        if self.regime in (Regime.GPOS, Regime.GNEG):
            g = anchor_value(self.instance, allocations, self.beta)
            anchor_event = g <= tol if self.regime is Regime.GPOS else g >= -tol
        catch_up = False
        if self.regime in (Regime.GNEG, Regime.GZERO):
            gap, common = self.catch_up_gap(allocations)
            catch_up = gap <= tol * max(1.0, common)
        return anchor_event, catch_up

    # ─────────────────────────────────────────────────────────────────────────
    # Manifold projection
    # ─────────────────────────────────────────────────────────────────────────

    def drift(self) -> float:
        indexes = pair_terms(self.instance, self.allocations).indexes
        inside = indexes[list(self.active)]
        spread = float(np.ptp(inside)) / max(1.0, float(inside.max()))
        if self.regime is Regime.GZERO:
            spread = max(spread, abs(anchor_value(self.instance, self.allocations, self.beta)))
        return spread

    def project(self, force: bool = False) -> None:
        if self.regime is Regime.GPOS:
            return
        total = self.total
        if self.regime is Regime.LINEAR:
            self.allocations = self.optimal_proportions() * total
            return
        if not force and self.drift() <= self.controls.project_tol:
            return

        best = self.instance.best_arm
        indexes = pair_terms(self.instance, self.allocations).indexes
        hint = float(indexes[list(self.active)].mean())
        outside_mass = float(self.allocations[self.outside()].sum())
        try:
            if self.regime is Regime.GNEG:
                if len(self.active) == 1:
                    return
                n1 = float(self.allocations[best])
                budget = total - n1 - outside_mass
                _, self.allocations = solve_common_index_fixed_n1(
                    self.instance, self.active, self.allocations, n1, budget, index_hint=hint
                )
            elif self.beta is not None:
                n1 = self.beta * total
                budget = total - n1 - outside_mass
                _, self.allocations = solve_common_index_fixed_n1(
                    self.instance, self.active, self.allocations, n1, budget, index_hint=hint
                )
            else:
                solution = solve_constrained_total(
                    self.instance,
                    self.active,
                    self.allocations,
                    total,
                    index_hint=hint,
                    n1_hint=float(self.allocations[best]),
                )
                self.allocations = solution.allocations
        except BaiError as exc:
            raise ConvergenceError(
                f"projection failed at N={total:.6g} in {self.regime.value}: {exc}",
                residuals={
                    "N": total,
                    "allocations": self.allocations.tolist(),
                    "regime": self.regime.value,
                    "active": list(self.active),
                },
            ) from exc

    # ─────────────────────────────────────────────────────────────────────────
    # Events
    # ─────────────────────────────────────────────────────────────────────────

    def locate(self, start: np.ndarray, step: float) -> Tuple[float, np.ndarray]:
        """Shortest step (to tolerance) after which some event has fired"""
        lo, hi = 0.0, step
        end = self.rk4(start, step)
        floor = max(self.controls.locate_tol, 4.0 * EPS * float(start.sum()))
        while hi - lo > floor:
            mid = 0.5 * (lo + hi)
            candidate = self.rk4(start, mid)
            if any(self.fired(candidate)):
                hi, end = mid, candidate
            else:
                lo = mid
        return hi, end

    def handle_events(self, anchor_event: bool, catch_up: bool) -> List[FluidEvent]:
        tol = self.controls.event_tol
        total = self.total
        logged = []
        challengers = self.instance.challengers
        if anchor_event:
            indexes = pair_terms(self.instance, self.allocations).indexes
            tied = minimum_index_set(indexes, challengers, tol)
            self.active = tuple(sorted(set(self.active) | set(tied)))
            self.regime = Regime.GZERO
            logged.append(FluidEvent(total, EventKind.ANCHOR_ZERO, self.active))

        if self.regime in (Regime.GNEG, Regime.GZERO):
            indexes = pair_terms(self.instance, self.allocations).indexes
            common = float(indexes[list(self.active)].mean())
            outside = self.outside()
            joined = tuple(
                int(a) for a in outside if indexes[a] <= common + tol * max(1.0, common)
            )
            if joined:
                self.active = tuple(sorted(self.active + joined))
                logged.append(FluidEvent(total, EventKind.CATCH_UP, joined))
            elif catch_up:
                logger.debug(f"catch-up at N={total:.6g} resolved by the anchor switch")

        if self.regime is Regime.GZERO and len(self.active) == challengers.size:
            self.regime = Regime.LINEAR
            logged.append(FluidEvent(total, EventKind.STABLE, self.active))

        if logged:
            self.project(force=True)
        for event in logged:
            logger.debug(f"fluid event {event.kind.value} at N={event.total:.6g} arms={event.arms}")
        return logged


def integrate(
    instance: BanditInstance,
    initial_allocations: np.ndarray,
    horizon: float,
    controls: Optional[FluidControls] = None,
) -> FluidTrajectory:
    """
    Integrate the fluid dynamics from ``initial_allocations`` up to N = horizon.

    Args:
        instance: Bandit instance (true means)
        initial_allocations: Nonnegative allocations with positive total N0
        horizon: Final total N_max > N0
        controls: Step, tolerance, sampling and beta settings

    Returns:
        FluidTrajectory with samples at the configured density, every event
        state and the final state

    Raises:
        ConvergenceError: on step-size underflow or a failed projection,
            carrying the last state
    """
    controls = controls or FluidControls()
    start = np.asarray(initial_allocations, dtype=float)
    if start.shape != (instance.num_arms,):
        raise DomainError(f"need {instance.num_arms} initial allocations, got {start.shape}")
    if np.any(start < 0) or not start.sum() > 0:
        raise DomainError(f"initial allocations must be >= 0 with positive total, got {start}")
    if not horizon > start.sum():
        raise DomainError(f"horizon {horizon} must exceed the initial total {start.sum()}")

    run = _Integrator(instance, controls)
    initial = classify(instance, start, controls.beta, controls.event_tol)
    run.allocations = start.copy()
    run.regime = initial.regime
    run.active = initial.active
    trajectory = FluidTrajectory(num_arms=instance.num_arms, beta=controls.beta)
    if run.regime is Regime.LINEAR:
        trajectory.events.append(FluidEvent(run.total, EventKind.STABLE, run.active))
    run.project(force=run.regime is not Regime.GPOS)
    # Initial ties (catch-ups already met) are folded in before the first step
    if run.regime in (Regime.GNEG, Regime.GZERO):
        trajectory.events.extend(run.handle_events(False, True))
    trajectory.samples.append(run.snapshot())
    logger.debug(f"fluid start N={run.total:.6g} regime={run.regime.value} B={run.active}")

    steps = 0
    while run.total < horizon * (1.0 - 4.0 * EPS):
        total = run.total
        step = min(controls.step_fraction * total, horizon - total)
        start_alloc = run.allocations
        candidate = run.rk4(start_alloc, step)
        anchor_event, catch_up = run.fired(candidate)
        events: List[FluidEvent] = []
        if anchor_event or catch_up:
            taken, candidate = run.locate(start_alloc, step)
            anchor_event, catch_up = run.fired(candidate)
            run.allocations = candidate
            events = run.handle_events(anchor_event, catch_up)
            if not events and taken <= 4.0 * EPS * total:
                raise ConvergenceError(
                    f"step-size underflow at N={total:.6g}",
                    residuals={"N": total, "allocations": start_alloc.tolist()},
                )
        else:
            run.allocations = candidate
            run.project()

        steps += 1
        trajectory.events.extend(events)
        if events or steps % controls.sample_every == 0:
            trajectory.samples.append(run.snapshot())

    if trajectory.samples[-1].total != run.total:
        trajectory.samples.append(run.snapshot())
    logger.info(
        f"Fluid trajectory to N={run.total:.6g}: {steps} steps, {len(trajectory.events)} events, "
        f"stability at {trajectory.stability_total}"
    )
    return trajectory
