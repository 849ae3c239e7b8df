"""
Command-line entry point ``bai``.

    bai solve --means 10,9.4,7,6.5
    bai run --means 1,0 --policy at2 --delta 0.01 --seed 7
    bai bench --config experiments/exp2.env --runs 400 --workers 8
    bai fluid --means 10,9.4,7,6.5 --start 1,1,1,1 --horizon 400
    bai diag --config experiments/exp1.env --horizon 5000

Exit status: 0 on success, 2 on usage or configuration errors, 1 when a
numerical solve does not converge.
"""

import json
import sys
from pathlib import Path
from typing import Any, Dict, Optional, Tuple

import click
import numpy as np

from anchored_bai import __version__
from anchored_bai.config.settings import get_settings
from anchored_bai.fluid.integrator import FluidControls, integrate
from anchored_bai.harness.bench import bench as run_bench
from anchored_bai.harness.config import ExperimentConfig, load_config
from anchored_bai.harness.diagnostics import diag_capture
from anchored_bai.harness.writers import write_bench, write_diag, write_fluid
from anchored_bai.oracle.brute_force import brute_force_tstar
from anchored_bai.oracle.solver import lower_bound, solve_beta_optimal, solve_optimal
from anchored_bai.sampling.runner import make_run_streams, run_until_stop
from anchored_bai.utils.errors import BaiError, ConfigError, DomainError
from anchored_bai.utils.logger import get_logger

EXIT_NUMERIC = 1
EXIT_CONFIG = 2


class BaiGroup(click.Group):
    """Maps toolkit errors to exit statuses"""

    def invoke(self, ctx: click.Context) -> Any:
        try:
            return super().invoke(ctx)
        except (ConfigError, DomainError) as exc:
            click.echo(f"Error: {exc}", err=True)
            raise click.exceptions.Exit(EXIT_CONFIG) from exc
        except BaiError as exc:
            click.echo(f"Error: {exc}", err=True)
            raise click.exceptions.Exit(EXIT_NUMERIC) from exc


def _experiment_options(func):
    """Config file plus the shared overrides"""
    options = [
        click.option(
            "--config", "config_path", type=click.Path(), help="Experiment file (KEY=value)"
        ),
        click.option("--means", help="Comma-separated arm means"),
        click.option("--family", help="gaussian | bernoulli | poisson | exponential"),
        click.option("--sigma", type=float, help="Gaussian standard deviation"),
        click.option(
            "--policy", "policies", multiple=True, help="at2 | iat2 | eb-tcb:<b> | eb-itcb:<b>"
        ),
        click.option("--delta", type=float, help="Confidence level"),
        click.option("--alpha", type=float, help="Forced-exploration exponent"),
        click.option(
            "--threshold",
            type=click.Choice(["gk16", "kk21"], case_sensitive=False),
            help="Stopping threshold",
        ),
        click.option("--seed", type=int, help="Master seed"),
        click.option("--runs", type=int, help="Number of replications"),
        click.option("--cap", type=int, help="Maximum pulls per run"),
    ]
    for option in reversed(options):
        func = option(func)
    return func


def _load(config_path: Optional[str], **overrides) -> ExperimentConfig:
    policies: Tuple[str, ...] = overrides.pop("policies", ())
    if policies:
        overrides["policies"] = ",".join(policies)
    return load_config(config_path, overrides)


def _emit_json(data: Dict[str, Any]) -> None:
    click.echo(json.dumps(data, indent=2, sort_keys=True))


def _floats(text: str, name: str) -> np.ndarray:
    try:
        return np.array([float(v) for v in text.split(",") if v.strip()])
    except ValueError:
        raise ConfigError(f"--{name} must be comma-separated numbers, got '{text}'") from None


@click.group(cls=BaiGroup)
@click.version_option(__version__, prog_name="bai")
@click.option("--log-level", default=None, help="Overrides BAI_LOG_LEVEL")
def cli(log_level: Optional[str]):
    """Anchored top-two best-arm identification"""
    get_logger("anchored_bai", log_level)


@cli.command()
@_experiment_options
@click.option("--beta", type=float, help="Solve the beta-optimal proportions instead")
@click.option("--grid", type=int, help="Also run the simplex-lattice search at this resolution")
def solve(config_path, beta, grid, **overrides):
    """Optimal proportions omega*, I* and T* as JSON."""
    config = _load(config_path, **overrides)
    instance = config.instance()
    result = solve_optimal(instance) if beta is None else solve_beta_optimal(instance, beta)
    out = {"instance": instance.to_dict(), **result.to_dict()}
    if beta is None:
        out["lower_bound"] = lower_bound(instance, config.delta)
        out["delta"] = config.delta
    if grid is not None:
        omega, t_star = brute_force_tstar(instance, grid)
        out["grid"] = {"resolution": grid, "omega": omega.tolist(), "t_star": t_star}
    _emit_json(out)


@cli.command()
@_experiment_options
@click.option("--run-id", type=int, default=0, show_default=True)
@click.option("--no-stop", is_flag=True, help="Ignore the stopping rule and run to the cap")
def run(config_path, run_id, no_stop, **overrides):
    """Single run of the first policy; prints the outcome as JSON."""
    config = _load(config_path, **overrides)
    policy = config.policy_objects()[0]
    streams = make_run_streams(config.seed, run_id)
    outcome = run_until_stop(
        config.instance(),
        policy,
        config.delta,
        config.threshold,
        streams.rewards,
        cap=config.resolved_cap,
        coin_stream=streams.coins,
        stopping=not no_stop,
    )
    outcome.run_id = run_id
    _emit_json({"config": config.resolved(), **outcome.to_dict()})


@cli.command()
@_experiment_options
@click.option("--workers", type=int, help="Parallel workers (BAI_THREADS by default)")
@click.option("--output-dir", type=click.Path(file_okay=False), help="Where CSV/JSON go")
@click.option("--per-run-csv", is_flag=True, help="Also write one row per run")
def bench(config_path, workers, output_dir, per_run_csv, **overrides):
    """Monte Carlo benchmark; writes the summary CSV and JSON."""
    config = _load(config_path, workers=workers, per_run_csv=per_run_csv or None, **overrides)
    summary = run_bench(config)
    target = output_dir or config.output_dir or get_settings().output_dir
    paths = write_bench(summary, target)
    click.echo(summary.to_frame().to_csv(index=False, float_format="%.10g"), nl=False)
    click.echo(f"Wrote {', '.join(str(p) for p in paths.values())}", err=True)


@cli.command()
@_experiment_options
@click.option("--start", required=True, help="Comma-separated initial allocations")
@click.option("--horizon", type=float, required=True, help="Final total N")
@click.option("--beta", type=float, help="Integrate the beta-EB fluid")
@click.option("--step-fraction", type=float, help="dN as a fraction of N")
@click.option("--sample-every", type=int, default=1, show_default=True)
@click.option("--output", type=click.Path(dir_okay=False), help="Trajectory CSV (default stdout)")
def fluid(config_path, start, horizon, beta, step_fraction, sample_every, output, **overrides):
    """Fluid trajectory CSV with an events sidecar."""
    config = _load(config_path, **overrides)
    instance = config.instance()
    controls = FluidControls(step_fraction=step_fraction, sample_every=sample_every, beta=beta)
    trajectory = integrate(instance, _floats(start, "start"), horizon, controls)
    header = "# config: " + json.dumps(
        {"instance": instance.to_dict(), "start": start, "horizon": horizon, **controls.to_dict()},
        sort_keys=True,
    )
    if output is None:
        click.echo(header)
        click.echo(trajectory.to_frame().to_csv(index=False, float_format="%.10g"), nl=False)
        click.echo(trajectory.events_to_json(), err=True)
        return
    paths = write_fluid(trajectory, Path(output), header)
    click.echo(f"Wrote {', '.join(str(p) for p in paths.values())}", err=True)


@cli.command()
@_experiment_options
@click.option("--horizon", type=int, help="Pulls per run")
@click.option("--stride", "trajectory_stride", type=int, help="Record every this many pulls")
@click.option("--series", help="Subset of anchor,indexes,proportions")
@click.option("--workers", type=int, help="Parallel workers")
@click.option("--output-dir", type=click.Path(file_okay=False), help="Where CSVs go")
def diag(config_path, output_dir, **overrides):
    """Trajectory capture with the stop rule disabled."""
    config = _load(config_path, **overrides)
    capture = diag_capture(config)
    target = output_dir or config.output_dir or get_settings().output_dir
    paths = write_diag(capture, target)
    click.echo("\n".join(str(p) for p in paths.values()))


def main(argv: Optional[list] = None) -> int:
    """Console entry point; returns the exit status"""
    try:
        status = cli.main(args=argv, prog_name="bai", standalone_mode=False)
    except click.ClickException as exc:
        exc.show()
        return exc.exit_code
    except click.exceptions.Abort:
        click.echo("Aborted!", err=True)
        return 1
    return status if isinstance(status, int) else 0


if __name__ == "__main__":
    sys.exit(main())
