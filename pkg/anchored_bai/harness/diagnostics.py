"""
Trajectory capture with the stop rule disabled.

Runs go to the configured horizon and record, every ``trajectory_stride``
pulls, the empirical anchor g, the normalized indexes H_a = I_a / N and the
proportions N_a / N. Records are averaged across runs per N with bands at
two standard deviations.
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional

import pandas as pd

from anchored_bai.harness.config import ExperimentConfig
from anchored_bai.sampling.runner import run_batch
from anchored_bai.utils.errors import ConfigError

logger = logging.getLogger(__name__)

_SERIES_PREFIX = {"anchor": "anchor", "indexes": "index_", "proportions": "proportion_"}


@dataclass
class DiagCapture:
    """Per policy, one banded frame per series"""

    config: ExperimentConfig
    frames: Dict[str, Dict[str, pd.DataFrame]] = field(default_factory=dict)

    def series(self, policy: str, name: str) -> pd.DataFrame:
        return self.frames[policy][name]


def _series_columns(frame: pd.DataFrame, series: str) -> List[str]:
    if series == "anchor":
        return ["anchor"]
    return [c for c in frame.columns if c.startswith(_SERIES_PREFIX[series])]


def band_frame(raw: pd.DataFrame, columns: List[str]) -> pd.DataFrame:
    """
    Mean and +-2 std bands per N.

    Args:
        raw: Stacked per-run records with an ``N`` column
        columns: Record columns to aggregate

    Returns:
        Frame with ``N`` then ``<col>_mean``, ``<col>_lo``, ``<col>_hi`` per column
    """
    grouped = raw.groupby("N", sort=True)[columns]
    mean = grouped.mean()
    std = grouped.std(ddof=1).fillna(0.0)
    out = pd.DataFrame(index=mean.index)
    for col in columns:
        out[f"{col}_mean"] = mean[col]
        out[f"{col}_lo"] = mean[col] - 2.0 * std[col]
        out[f"{col}_hi"] = mean[col] + 2.0 * std[col]
    return out.reset_index()


def normalized_index_spread(indexes: pd.DataFrame) -> pd.Series:
    """Max minus min of the mean normalized indexes at each N of an indexes frame"""
    means = indexes[[c for c in indexes.columns if c.endswith("_mean")]]
    return pd.Series((means.max(axis=1) - means.min(axis=1)).to_numpy(), index=indexes["N"])


def diag_capture(
    config: ExperimentConfig,
    horizon: Optional[int] = None,
    workers: Optional[int] = None,
) -> DiagCapture:
    """
    Capture banded trajectories for every policy of ``config``.

    Args:
        config: Experiment config; ``series`` and ``trajectory_stride`` select
            what is recorded
        horizon: Pulls per run (config.horizon when omitted)
        workers: joblib n_jobs

    Raises:
        ConfigError: if no horizon is set or it is below K
    """
    horizon = horizon if horizon is not None else config.horizon
    num_arms = len(config.means)
    if horizon is None or horizon < num_arms:
        raise ConfigError(f"diagnostics need a horizon >= K={num_arms}, got {horizon}")

    instance = config.instance()
    n_jobs = workers if workers is not None else config.workers
    capture = DiagCapture(config=config)
    for policy in config.policy_objects():
        logger.info(
            f"Diagnostics {config.name}: {policy.name}, {config.runs} runs to N={horizon}, "
            f"stride {config.trajectory_stride}"
        )
        outcomes = run_batch(
            instance,
            policy,
            config.delta,
            config.threshold,
            config.seed,
            range(config.runs),
            cap=horizon,
            workers=n_jobs,
            stopping=False,
            trajectory_stride=config.trajectory_stride,
        )
        raw = pd.concat([o.trajectory for o in outcomes], ignore_index=True)
        capture.frames[policy.name] = {
            series: band_frame(raw, _series_columns(raw, series)) for series in config.series
        }
    return capture
