from .empirical import IndexReport, SamplingState, empirical_report, stopping_statistic
from .transport import (
    GAP_TOL,
    anchor,
    index_value,
    pairwise_indexes,
    transport_terms,
    weighted_mid,
)

__all__ = [
    "GAP_TOL",
    "IndexReport",
    "SamplingState",
    "anchor",
    "empirical_report",
    "index_value",
    "pairwise_indexes",
    "stopping_statistic",
    "transport_terms",
    "weighted_mid",
]
