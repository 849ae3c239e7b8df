from .bench import BENCH_COLUMNS, RUN_COLUMNS, BenchSummary, PolicySummary, bench
from .config import SERIES, ExperimentConfig, load_config
from .diagnostics import DiagCapture, band_frame, diag_capture, normalized_index_spread
from .writers import (
    read_csv,
    read_header,
    write_bench,
    write_csv,
    write_diag,
    write_fluid,
    write_json,
)

__all__ = [
    "BENCH_COLUMNS",
    "RUN_COLUMNS",
    "SERIES",
    "BenchSummary",
    "DiagCapture",
    "ExperimentConfig",
    "PolicySummary",
    "band_frame",
    "bench",
    "diag_capture",
    "load_config",
    "normalized_index_spread",
    "read_csv",
    "read_header",
    "write_bench",
    "write_csv",
    "write_diag",
    "write_fluid",
    "write_json",
]
