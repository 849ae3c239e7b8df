"""
Monte Carlo benchmark: stopping times and error rates per policy.

Every policy of a config is run over the same run ids and master seed, so
policies see common reward streams. Aggregates depend only on the config,
never on the worker count.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence

import numpy as np
import pandas as pd

from anchored_bai.harness.config import ExperimentConfig
from anchored_bai.sampling.runner import RunOutcome, error_rate, run_batch

logger = logging.getLogger(__name__)

BENCH_COLUMNS = ["policy", "runs", "mean_tau", "stderr_tau", "error_rate", "cap_hits"]
RUN_COLUMNS = ["run_id", "policy", "tau", "recommended", "correct", "hit_cap"]


@dataclass
class PolicySummary:
    """Aggregate of one policy's runs"""

    policy: str
    runs: int
    mean_tau: float
    stderr_tau: float
    error_rate: float
    cap_hits: int
    mean_wall_time: float = 0.0
    wall_time_std: float = 0.0

    @classmethod
    def from_outcomes(cls, policy: str, outcomes: Sequence[RunOutcome]) -> "PolicySummary":
        taus = np.array([o.tau for o in outcomes], dtype=float)
        runs = taus.size
        # Sample std / sqrt(runs); a single run has no spread
        stderr = float(taus.std(ddof=1) / math.sqrt(runs)) if runs > 1 else 0.0
        wall = np.array([o.wall_time for o in outcomes], dtype=float)
        return cls(
            policy=policy,
            runs=runs,
            mean_tau=float(taus.mean()),
            stderr_tau=stderr,
            error_rate=error_rate(outcomes),
            cap_hits=sum(o.hit_cap for o in outcomes),
            mean_wall_time=float(wall.mean()),
            wall_time_std=float(wall.std(ddof=1)) if runs > 1 else 0.0,
        )

    def to_dict(self) -> Dict[str, object]:
        return {
            "policy": self.policy,
            "runs": self.runs,
            "mean_tau": self.mean_tau,
            "stderr_tau": self.stderr_tau,
            "error_rate": self.error_rate,
            "cap_hits": self.cap_hits,
            "mean_wall_time": self.mean_wall_time,
            "wall_time_std": self.wall_time_std,
        }


@dataclass
class BenchSummary:
    config: ExperimentConfig
    rows: List[PolicySummary]
    outcomes: Dict[str, List[RunOutcome]] = field(default_factory=dict, repr=False)

    def row(self, policy: str) -> PolicySummary:
        for summary in self.rows:
            if summary.policy == policy:
                return summary
        raise KeyError(f"no policy '{policy}' in this summary")

    def to_frame(self) -> pd.DataFrame:
        """Summary table; wall time is left out so reruns are byte-identical"""
        return pd.DataFrame([r.to_dict() for r in self.rows], columns=BENCH_COLUMNS)

    def runs_frame(self) -> pd.DataFrame:
        records = [
            {
                "run_id": o.run_id,
                "policy": name,
                "tau": o.tau,
                "recommended": o.recommended,
                "correct": o.correct,
                "hit_cap": o.hit_cap,
            }
            for name, outcomes in self.outcomes.items()
            for o in outcomes
        ]
        return pd.DataFrame(records, columns=RUN_COLUMNS)

    def to_dict(self) -> Dict[str, object]:
        return {
            "config": self.config.resolved(),
            "policies": [r.to_dict() for r in self.rows],
        }


def bench(config: ExperimentConfig, workers: Optional[int] = None) -> BenchSummary:
    """
    Run every policy of ``config`` for ``config.runs`` replications.

    Args:
        config: Validated experiment config
        workers: joblib n_jobs; falls back to config.workers, then Settings

    Returns:
        BenchSummary with one row per policy, in config order. Cap hits are
        counted, never raised.
    """
    instance = config.instance()
    n_jobs = workers if workers is not None else config.workers
    rows = []
    outcomes = {}
    for policy in config.policy_objects():
        logger.info(f"Bench {config.name}: {policy.name}, {config.runs} runs, delta={config.delta}")
        batch = run_batch(
            instance,
            policy,
            config.delta,
            config.threshold,
            config.seed,
            range(config.runs),
            cap=config.resolved_cap,
            workers=n_jobs,
        )
        summary = PolicySummary.from_outcomes(policy.name, batch)
        if summary.cap_hits:
            logger.warning(f"{policy.name}: {summary.cap_hits} of {summary.runs} runs hit the cap")
        logger.info(
            f"{policy.name}: mean tau {summary.mean_tau:.2f} (stderr {summary.stderr_tau:.2f}), "
            f"error rate {summary.error_rate:.4f}"
        )
        rows.append(summary)
        outcomes[policy.name] = batch
    return BenchSummary(config=config, rows=rows, outcomes=outcomes)
