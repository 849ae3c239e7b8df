#!/usr/bin/env python3
"""
Reproduce the four benchmark experiments
Runs the presets in experiments/ and writes their tables under the output dir
"""
import sys
from pathlib import Path

import click

# Add parent directory to path for imports
sys.path.insert(0, str(Path(__file__).resolve().parents[1]))

from anchored_bai.harness.bench import bench
from anchored_bai.harness.config import load_config
from anchored_bai.harness.diagnostics import diag_capture, normalized_index_spread
from anchored_bai.harness.writers import write_bench, write_diag
from anchored_bai.utils.logger import get_logger

logger = get_logger("anchored_bai")

EXPERIMENTS_DIR = Path(__file__).resolve().parents[1] / "experiments"
BENCH_PRESETS = ["exp2", "exp3", "exp4"]


def run_diagnostics(output_dir: Path, runs, workers) -> None:
    """Experiment 1: banded anchor / index / proportion trajectories"""
    config = load_config(str(EXPERIMENTS_DIR / "exp1.env"), {"runs": runs, "workers": workers})
    capture = diag_capture(config)
    write_diag(capture, output_dir)
    for policy, frames in capture.frames.items():
        if "indexes" in frames:
            spread = normalized_index_spread(frames["indexes"])
            logger.info(
                f"{policy}: normalized index spread {spread.iloc[0]:.4f} at N={spread.index[0]}, "
                f"{spread.iloc[-1]:.4f} at N={spread.index[-1]}"
            )


def run_bench(name: str, output_dir: Path, runs, workers) -> None:
    config = load_config(str(EXPERIMENTS_DIR / f"{name}.env"), {"runs": runs, "workers": workers})
    summary = bench(config)
    write_bench(summary, output_dir)
    for row in summary.rows:
        logger.info(
            f"{name} {row.policy:>12}: {row.mean_tau:10.2f} +- {row.stderr_tau:.2f} "
            f"(error rate {row.error_rate:.4f}, "
            f"{row.mean_wall_time * 1e6:.1f} +- {row.wall_time_std * 1e6:.1f} us/run)"
        )


@click.command()
@click.option(
    "--only",
    multiple=True,
    type=click.Choice(["exp1", "exp2", "exp2_beta_sweep", "exp3", "exp4"]),
    help="Run a subset (default: exp1 to exp4)",
)
@click.option("--runs", type=int, help="Override the run count of every preset")
@click.option("--workers", type=int, help="Parallel workers")
@click.option(
    "--output-dir", type=click.Path(file_okay=False), default="results", show_default=True
)
def main(only, runs, workers, output_dir):
    """Main entry point"""
    output_dir = Path(output_dir)
    selected = list(only) or ["exp1", *BENCH_PRESETS]
    for name in selected:
        logger.info(f"Running {name}...")
        if name == "exp1":
            run_diagnostics(output_dir, runs, workers)
        else:
            run_bench(name, output_dir, runs, workers)
    logger.info(f"All results written to {output_dir}")


if __name__ == "__main__":
    main()
