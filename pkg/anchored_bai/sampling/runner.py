"""
Run loop: sample, update, stop.

Each run owns its SamplingState and two counter-based substreams (rewards and
beta-EB coins) keyed by (master_seed, run_id), so outcomes do not depend on
which worker executes a run. run_batch fans runs out with joblib and returns
them ordered by run id.
"""

import logging
import time
from dataclasses import dataclass
from typing import Dict, List, NamedTuple, Optional, Sequence

import numpy as np
import pandas as pd
from joblib import Parallel, delayed
from numpy.random import Generator

from anchored_bai.config.settings import get_settings
from anchored_bai.indexes.empirical import IndexReport, SamplingState, empirical_report
from anchored_bai.indexes.transport import pairwise_indexes
from anchored_bai.sampling.policy import Policy, ThresholdStyle, threshold
from anchored_bai.sampling.rules import choose_arm, under_explored
from anchored_bai.spef.instance import BanditInstance
from anchored_bai.utils.errors import DegenerateError, DomainError
from anchored_bai.utils.rng import StreamRole, substream

logger = logging.getLogger(__name__)


class RunStreams(NamedTuple):
    rewards: Generator
    coins: Generator


def make_run_streams(master_seed: int, run_id: int) -> RunStreams:
    """Reward and coin substreams of one run"""
    return RunStreams(
        rewards=substream(master_seed, run_id, StreamRole.REWARDS),
        coins=substream(master_seed, run_id, StreamRole.COINS),
    )


@dataclass
class RunOutcome:
    """Result of one replication"""

    tau: int
    recommended: int
    correct: bool
    final_counts: np.ndarray
    hit_cap: bool
    policy: str = ""
    run_id: int = 0
    wall_time: float = 0.0
    trajectory: Optional[pd.DataFrame] = None

    def to_dict(self) -> Dict[str, object]:
        """Serializable record (trajectory excluded)"""
        return {
            "run_id": self.run_id,
            "policy": self.policy,
            "tau": self.tau,
            "recommended": self.recommended,
            "correct": self.correct,
            "final_counts": self.final_counts.tolist(),
            "hit_cap": self.hit_cap,
            "wall_time": self.wall_time,
        }


def _trajectory_row(instance: BanditInstance, state: SamplingState, anchor_value: float) -> list:
    # Diagnostic indexes are taken against the true best arm
    n = state.total_pulls
    means = state.empirical_means()
    indexes, _ = pairwise_indexes(instance.family, means, state.counts, instance.best_arm)
    report = IndexReport.build(instance.best_arm, indexes, anchor_value, total_pulls=n)
    normalized = report.normalized_indexes()
    return [n, anchor_value, *(normalized[a] for a in instance.challengers), *(state.counts / n)]


def _trajectory_columns(instance: BanditInstance) -> List[str]:
    return (
        ["N", "anchor"]
        + [f"index_{a}" for a in instance.challengers]
        + [f"proportion_{a}" for a in range(instance.num_arms)]
    )


def run_until_stop(
    instance: BanditInstance,
    policy: Policy,
    delta: float,
    threshold_style: ThresholdStyle,
    rng_stream: Generator,
    cap: Optional[int] = None,
    coin_stream: Optional[Generator] = None,
    stopping: bool = True,
    trajectory_stride: Optional[int] = None,
) -> RunOutcome:
    """
    Execute one run of ``policy`` until the GLLR rule fires or ``cap`` pulls.

    Args:
        instance: Ground-truth instance
        policy: Sampling rule
        delta: Confidence level in (0, 1)
        threshold_style: GK16 or KK21
        rng_stream: Reward substream
        cap: Maximum number of pulls (Settings.default_cap); the horizon when
            ``stopping`` is False
        coin_stream: beta-EB coin substream; spawned from rng_stream if omitted
        stopping: Disable to run to ``cap`` regardless of the statistic
        trajectory_stride: Record (N, anchor, H_a, proportions) every this many
            pulls once all arms are pulled

    Returns:
        RunOutcome; ``hit_cap`` is set only when stopping was enabled
    """
    cap = get_settings().default_cap if cap is None else int(cap)
    k = instance.num_arms
    if cap < k:
        raise DomainError(f"cap must be at least K={k}, got {cap}")
    if not 0.0 < delta < 1.0:
        raise DomainError(f"delta must lie in (0, 1), got {delta}")
    if trajectory_stride is not None and trajectory_stride < 1:
        raise DomainError(f"trajectory stride must be >= 1, got {trajectory_stride}")
    if policy.uses_coin and coin_stream is None:
        coin_stream = rng_stream.spawn(1)[0]

    started = time.perf_counter()
    family = instance.family
    means = instance.means
    state = SamplingState(instance)
    report = None
    rows = []
    stopped = False

    while state.total_pulls < cap:
        n = state.total_pulls + 1
        coin = None
        if policy.uses_coin and not under_explored(state.counts, n, policy.alpha):
            coin = coin_stream.random()
        arm = choose_arm(state, policy, coin, report)
        state.update(arm, float(family.draw(means[arm], rng_stream)))

        if not state.all_pulled:
            continue
        report = empirical_report(instance, state)
        if trajectory_stride is not None and n % trajectory_stride == 0:
            rows.append(_trajectory_row(instance, state, report.anchor_value))
        if stopping and report.min_index > threshold(threshold_style, n, delta, k):
            stopped = True
            break

    if report is not None:
        recommended = report.best_arm
    else:
        pulled = np.flatnonzero(state.counts > 0)
        recommended = int(pulled[np.argmax(state.reward_sums[pulled] / state.counts[pulled])])

    hit_cap = stopping and not stopped
    if hit_cap:
        logger.warning(f"{policy.name} hit the cap of {cap} pulls without stopping")

    trajectory = None
    if trajectory_stride is not None:
        trajectory = pd.DataFrame(rows, columns=_trajectory_columns(instance))

    return RunOutcome(
        tau=state.total_pulls,
        recommended=recommended,
        correct=recommended == instance.best_arm,
        final_counts=state.counts.copy(),
        hit_cap=hit_cap,
        policy=policy.name,
        wall_time=time.perf_counter() - started,
        trajectory=trajectory,
    )


def _run_one(
    instance: BanditInstance,
    policy: Policy,
    delta: float,
    threshold_style: ThresholdStyle,
    master_seed: int,
    run_id: int,
    cap: Optional[int],
    stopping: bool,
    trajectory_stride: Optional[int],
) -> RunOutcome:
    streams = make_run_streams(master_seed, run_id)
    outcome = run_until_stop(
        instance,
        policy,
        delta,
        threshold_style,
        streams.rewards,
        cap=cap,
        coin_stream=streams.coins,
        stopping=stopping,
        trajectory_stride=trajectory_stride,
    )
    outcome.run_id = run_id
    return outcome


def run_batch(
    instance: BanditInstance,
    policy: Policy,
    delta: float,
    threshold_style: ThresholdStyle,
    master_seed: int,
    run_ids: Sequence[int],
    cap: Optional[int] = None,
    workers: Optional[int] = None,
    stopping: bool = True,
    trajectory_stride: Optional[int] = None,
) -> List[RunOutcome]:
    """
    Independent runs in parallel, returned in run-id order.

    Args:
        workers: joblib n_jobs (Settings.worker_count when omitted; -1 = all cores)
    """
    n_jobs = get_settings().worker_count if workers is None else workers
    outcomes = Parallel(n_jobs=n_jobs, backend="loky")(
        delayed(_run_one)(
            instance,
            policy,
            delta,
            threshold_style,
            master_seed,
            run_id,
            cap,
            stopping,
            trajectory_stride,
        )
        for run_id in run_ids
    )
    return sorted(outcomes, key=lambda o: o.run_id)


def error_rate(outcomes: Sequence[RunOutcome]) -> float:
    """Fraction of outcomes recommending a non-best arm"""
    if len(outcomes) == 0:
        raise DegenerateError("error rate of an empty batch")
    return sum(not o.correct for o in outcomes) / len(outcomes)


def delta_correctness_estimate(
    instance: BanditInstance,
    policy: Policy,
    delta: float,
    runs: int,
    rng_master: int,
    threshold_style: ThresholdStyle = ThresholdStyle.GK16,
    cap: Optional[int] = None,
    workers: Optional[int] = None,
) -> float:
    """
    Empirical misidentification rate over ``runs`` replications.

    Args:
        rng_master: Master seed of the per-run substreams

    Returns:
        Error rate in [0, 1]; a delta-correct policy keeps it below delta
    """
    if runs < 100:
        raise DomainError(f"delta-correctness needs at least 100 runs, got {runs}")
    outcomes = run_batch(
        instance, policy, delta, threshold_style, rng_master, range(runs), cap, workers
    )
    rate = error_rate(outcomes)
    logger.info(f"{policy.name}: error rate {rate:.4f} over {runs} runs at delta={delta}")
    return rate
