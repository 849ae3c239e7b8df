"""
CSV and JSON artifacts.

Every CSV starts with a ``# config:`` comment line holding the resolved
config as JSON; read_csv skips it.
"""

import json
import logging
from pathlib import Path
from typing import Any, Dict, Union

import pandas as pd

from anchored_bai.fluid.integrator import FluidTrajectory
from anchored_bai.harness.bench import BenchSummary
from anchored_bai.harness.diagnostics import DiagCapture

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]

FLOAT_FORMAT = "%.10g"


def write_csv(frame: pd.DataFrame, path: PathLike, header: str) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as handle:
        handle.write(header.rstrip("\n") + "\n")
        frame.to_csv(handle, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
    logger.debug(f"wrote {len(frame)} rows to {path}")
    return path


def read_csv(path: PathLike) -> pd.DataFrame:
    return pd.read_csv(path, comment="#")


def read_header(path: PathLike) -> Dict[str, Any]:
    """Config embedded in the first line of a CSV artifact"""
    with Path(path).open() as handle:
        first = handle.readline()
    if not first.startswith("# config: "):
        raise ValueError(f"{path} has no config header")
    return json.loads(first[len("# config: ") :])


def write_json(data: Any, path: PathLike) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(data, indent=2, sort_keys=True) + "\n")
    return path


def write_bench(summary: BenchSummary, output_dir: PathLike) -> Dict[str, Path]:
    """Summary CSV + JSON, and the per-run CSV when the config asks for it"""
    output_dir = Path(output_dir)
    name = summary.config.name
    header = summary.config.header()
    paths = {
        "summary_csv": write_csv(summary.to_frame(), output_dir / f"{name}_summary.csv", header),
        "summary_json": write_json(summary.to_dict(), output_dir / f"{name}_summary.json"),
    }
    if summary.config.per_run_csv:
        paths["runs_csv"] = write_csv(summary.runs_frame(), output_dir / f"{name}_runs.csv", header)
    logger.info(f"Bench results for {name} written to {output_dir}")
    return paths


def write_diag(capture: DiagCapture, output_dir: PathLike) -> Dict[str, Path]:
    output_dir = Path(output_dir)
    name = capture.config.name
    header = capture.config.header()
    paths = {}
    for policy, frames in capture.frames.items():
        for series, frame in frames.items():
            key = f"{policy}_{series}"
            paths[key] = write_csv(frame, output_dir / f"{name}_{key}.csv", header)
    logger.info(f"Diagnostics for {name} written to {output_dir}")
    return paths


def write_fluid(trajectory: FluidTrajectory, path: PathLike, header: str) -> Dict[str, Path]:
    """Trajectory CSV plus the events sidecar ``<stem>_events.json``"""
    path = Path(path)
    events = path.with_name(f"{path.stem}_events.json")
    write_csv(trajectory.to_frame(), path, header)
    events.parent.mkdir(parents=True, exist_ok=True)
    events.write_text(trajectory.events_to_json() + "\n")
    return {"trajectory_csv": path, "events_json": events}
