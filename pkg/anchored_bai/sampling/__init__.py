from .policy import Policy, PolicyKind, ThresholdStyle, threshold
from .rules import challenger, choose_arm, under_explored
from .runner import (
    RunOutcome,
    RunStreams,
    delta_correctness_estimate,
    error_rate,
    make_run_streams,
    run_batch,
    run_until_stop,
)

__all__ = [
    "Policy",
    "PolicyKind",
    "RunOutcome",
    "RunStreams",
    "ThresholdStyle",
    "challenger",
    "choose_arm",
    "delta_correctness_estimate",
    "error_rate",
    "make_run_streams",
    "run_batch",
    "run_until_stop",
    "threshold",
    "under_explored",
]
