"""Command-line interface for the torus observability laboratory."""

import click
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence
import sys

# Add parent directory to path
sys.path.insert(0, str(Path(__file__).parent.parent.parent))

from src import __version__
from src.core.experiment_runner import ExperimentConfig, ExperimentRunner, RunOutcome
from src.utils.config import get_config, reset_config
from src.utils.error_handlers import (
    EXIT_ERROR,
    EXIT_FALSIFIED,
    EXIT_PASS,
    ConfigurationError,
)
from src.utils.logger import reset_logger
from rich.console import Console
from rich.table import Table

console = Console()

REGIONS = click.Choice(["ball", "square"])


def _float_list(ctx, param, value: Optional[str]) -> Optional[List[float]]:
    if value is None:
        return None
    try:
        return [float(v) for v in value.split(",") if v.strip()]
    except ValueError:
        raise click.BadParameter(f"expected comma separated numbers, got {value!r}")


def _int_list(ctx, param, value: Optional[str]) -> Optional[List[int]]:
    if value is None:
        return None
    try:
        return [int(v) for v in value.split(",") if v.strip()]
    except ValueError:
        raise click.BadParameter(f"expected comma separated integers, got {value!r}")


def output_options(func):
    """Options shared by every experiment subcommand."""
    func = click.option(
        "--stem", default=None, help="Base name of the report files (defaults to the subcommand)"
    )(func)
    func = click.option(
        "--format",
        "output_format",
        type=click.Choice(["csv", "json"]),
        default=None,
        help="Report format",
    )(func)
    func = click.option(
        "--output-dir",
        "-o",
        type=click.Path(file_okay=False),
        default=None,
        help="Directory for reports (defaults to output.reports_dir)",
    )(func)
    return func


def _execute(
    ctx: click.Context,
    subcommand: str,
    params: Dict[str, Any],
    output_dir: Optional[str],
    output_format: Optional[str],
    stem: Optional[str],
):
    experiment = ExperimentConfig(
        subcommand=subcommand,
        params={k: v for k, v in params.items() if v is not None},
        output_dir=Path(output_dir) if output_dir else None,
        output_format=output_format,
        stem=stem,
    )
    outcome = ExperimentRunner().run(experiment)
    _display_outcome(subcommand, outcome)
    ctx.exit(outcome.status)


def _display_outcome(subcommand: str, outcome: RunOutcome):
    """Display a run summary."""
    table = Table(title=subcommand, show_header=True, header_style="bold cyan")
    table.add_column("Field", style="cyan")
    table.add_column("Value", justify="right", style="yellow")
    for key, value in outcome.payload.items():
        if isinstance(value, (list, dict)):
            if isinstance(value, list):
                table.add_row(key, f"[{len(value)} items]")
            continue
        table.add_row(key, f"{value:.10g}" if isinstance(value, float) else str(value))
    if outcome.payload:
        console.print(table)

    for path in outcome.files:
        console.print(f"  wrote [green]{path}[/green]")

    if outcome.status == EXIT_PASS:
        console.print("[green]✓ pass[/green]")
    elif outcome.status == EXIT_FALSIFIED:
        console.print(f"[yellow]⚠ falsified: {outcome.error}[/yellow]")
    else:
        console.print(f"[red]Error: {outcome.error}[/red]")


@click.group()
@click.version_option(version=__version__, prog_name="torusobs")
@click.option(
    "--config",
    "-c",
    "config_path",
    help="Path to custom configuration file",
    default=None,
    type=click.Path(exists=True),
)
def cli(config_path):
    """
    Torus Observability Laboratory

    Numerical checks of observability for the free Schrodinger equation on the
    unit 2-torus: direction classification, geodesic hitting times, spectral
    propagation, eigenspace Gramians and observability constants.
    """
    if config_path:
        reset_config()
        reset_logger()
    try:
        get_config(config_path)
    except (ConfigurationError, FileNotFoundError) as e:
        raise click.ClickException(str(e))


# --- lattice ---------------------------------------------------------------


@cli.command("enumerate")
@click.option("--eps", type=float, required=True, help="Scale parameter")
@output_options
@click.pass_context
def enumerate_directions(ctx, eps, output_dir, output_format, stem):
    """
    List the primitive directions (a, b) with a^2 + b^2 < 32/eps^2.

    \b
    Example:
      torusobs enumerate --eps 1
    """
    _execute(ctx, "enumerate", {"eps": eps}, output_dir, output_format, stem)


@cli.command()
@click.option("--eps", type=float, required=True, help="Scale parameter")
@click.option("--angle", type=float, default=None, help="Direction angle in radians")
@click.option("--vector", type=float, nargs=2, default=None, help="Direction as a vector X Y")
@click.option("--c", "C", type=float, default=None, help="Window constant (default lattice.classify_C)")
@output_options
@click.pass_context
def classify(ctx, eps, angle, vector, C, output_dir, output_format, stem):
    """Classify a direction as eps-rational or irrational."""
    if angle is None and not vector:
        raise click.UsageError("give --angle or --vector")
    params = {"eps": eps, "angle": angle, "vector": list(vector) if vector else None, "C": C}
    _execute(ctx, "classify", params, output_dir, output_format, stem)


@cli.command()
@click.option("--alpha", type=float, required=True, help="Real number in (0, 1)")
@click.option("--n-max", "n_max", type=int, required=True, help="Largest denominator")
@click.option("--terms", type=int, default=None, help="Continued fraction terms to report")
@output_options
@click.pass_context
def approx(ctx, alpha, n_max, terms, output_dir, output_format, stem):
    """Best approximation |n*alpha - m| with 1 <= n <= n_max."""
    params = {"alpha": alpha, "n_max": n_max, "terms": terms}
    _execute(ctx, "approx", params, output_dir, output_format, stem)


@cli.command()
@click.option("--n", "N", type=int, required=True, help="Non-negative integer")
@output_options
@click.pass_context
def r2(ctx, N, output_dir, output_format, stem):
    """Representations of N as a sum of two squares."""
    _execute(ctx, "r2", {"N": N}, output_dir, output_format, stem)


@cli.command()
@click.option("--eps", type=float, required=True, help="Scale parameter")
@click.option("--denominator", type=float, default=None, help="Window width eps/(denominator*L)")
@click.option("--adjacent", is_flag=True, help="Check angularly adjacent pairs only")
@output_options
@click.pass_context
def windows(ctx, eps, denominator, adjacent, output_dir, output_format, stem):
    """Angular support windows and their pairwise disjointness."""
    params = {"eps": eps, "denominator": denominator, "exhaustive": not adjacent}
    _execute(ctx, "windows", params, output_dir, output_format, stem)


# --- geodesics -------------------------------------------------------------


@cli.command()
@click.option("--x", type=float, required=True)
@click.option("--y", type=float, required=True)
@click.option("--angle", type=float, required=True, help="Direction angle in radians")
@click.option("--r", type=float, required=True, help="Ball radius")
@click.option("--horizon", type=float, required=True, help="Largest time")
@click.option("--center", type=float, nargs=2, default=None, help="Ball centre CX CY")
@output_options
@click.pass_context
def hit(ctx, x, y, angle, r, horizon, center, output_dir, output_format, stem):
    """Exact first hitting time of a ball along a straight line."""
    params = {
        "x": x,
        "y": y,
        "angle": angle,
        "r": r,
        "horizon": horizon,
        "center": list(center) if center else None,
    }
    _execute(ctx, "hit", params, output_dir, output_format, stem)


@cli.command("hit-verify")
@click.option("--eps", type=float, required=True, help="Scale parameter")
@click.option("--c", "C", type=float, default=None, help="Window constant")
@click.option("--points", "n_points", type=int, default=None, help="Start points")
@click.option("--dirs", "n_dirs", type=int, default=None, help="Irrational directions")
@click.option("--seed", type=int, default=None, help="Random seed")
@click.option("--workers", type=int, default=None, help="Worker threads")
@click.option("--no-progress", is_flag=True, help="Disable progress bars")
@output_options
@click.pass_context
def hit_verify(ctx, eps, C, n_points, n_dirs, seed, workers, no_progress, output_dir,
               output_format, stem):
    """
    Check that irrational directions reach B(0, eps/3) by C'/eps.

    \b
    Example:
      torusobs hit-verify --eps 0.2 --c 25 --points 100 --dirs 50 --seed 7
    """
    show_progress = not no_progress and get_config().get("processing.show_progress", True)
    params = {
        "eps": eps,
        "C": C,
        "n_points": n_points,
        "n_dirs": n_dirs,
        "seed": seed,
        "workers": workers,
        "show_progress": show_progress,
    }
    _execute(ctx, "hit-verify", params, output_dir, output_format, stem)


@cli.command()
@click.option("--a", type=int, required=True)
@click.option("--b", type=int, required=True)
@output_options
@click.pass_context
def sections(ctx, a, b, output_dir, output_format, stem):
    """Crossings of the closed geodesic (a, b) with the circle x = 0."""
    _execute(ctx, "sections", {"a": a, "b": b}, output_dir, output_format, stem)


# --- spectral --------------------------------------------------------------


@cli.command("propagate-check")
@click.option("--k", "K", type=int, default=None, help="Mode cutoff")
@click.option("--h", type=float, required=True, help="Semiclassical parameter")
@click.option("--t", type=float, required=True, help="Time")
@click.option("--seed", type=int, default=None, help="Random seed")
@click.option("--samples", type=int, default=None, help="Random fields to test")
@output_options
@click.pass_context
def propagate_check(ctx, K, h, t, seed, samples, output_dir, output_format, stem):
    """Unitarity, period and propagation-defect checks on random fields."""
    params = {"K": K, "h": h, "t": t, "seed": seed, "samples": samples}
    _execute(ctx, "propagate-check", params, output_dir, output_format, stem)


@cli.command("ball-coeff")
@click.option("--eps", type=float, required=True, help="Ball radius")
@click.option("--m", type=int, nargs=2, default=None, help="Frequency M1 M2")
@click.option("--table", type=int, default=None, help="Export all |m|_inf <= TABLE")
@output_options
@click.pass_context
def ball_coeff(ctx, eps, m, table, output_dir, output_format, stem):
    """Fourier coefficients of the ball indicator."""
    params = {"eps": eps, "m": list(m) if m else None, "table": table}
    _execute(ctx, "ball-coeff", params, output_dir, output_format, stem)


# --- observability ---------------------------------------------------------


@cli.command()
@click.option("--n", "N", type=int, required=True, help="Eigenvalue index |k|^2")
@click.option("--eps", type=float, required=True, help="Region radius")
@click.option("--region", type=REGIONS, default=None)
@output_options
@click.pass_context
def gramian(ctx, N, eps, region, output_dir, output_format, stem):
    """Gramian of the region over one eigenspace."""
    params = {"N": N, "eps": eps, "region": region}
    _execute(ctx, "gramian", params, output_dir, output_format, stem)


@cli.command("obs-const")
@click.option("--eps", type=float, required=True, help="Region radius")
@click.option("--n-max", "N_max", type=int, default=None, help="Truncation |k|^2 <= N_MAX")
@click.option("--region", type=REGIONS, default=None)
@click.option("--workers", type=int, default=None, help="Worker threads")
@output_options
@click.pass_context
def obs_const(ctx, eps, N_max, region, workers, output_dir, output_format, stem):
    """
    Truncated observability constant 2*pi / min lambda_min.

    \b
    Example:
      torusobs obs-const --eps 0.25 --n-max 0
    """
    params = {"eps": eps, "N_max": N_max, "region": region, "workers": workers}
    _execute(ctx, "obs-const", params, output_dir, output_format, stem)


@cli.command("verify-ineq")
@click.option("--eps", type=float, required=True, help="Region radius")
@click.option("--n-max", "N_max", type=int, default=None)
@click.option("--samples", "n_samples", type=int, default=None)
@click.option("--seed", type=int, default=None)
@click.option("--quad-points", "quad_points", type=int, default=None)
@click.option("--region", type=REGIONS, default=None)
@output_options
@click.pass_context
def verify_ineq(ctx, eps, N_max, n_samples, seed, quad_points, region, output_dir,
                output_format, stem):
    """Sampled check of the truncated observability inequality."""
    params = {
        "eps": eps,
        "N_max": N_max,
        "n_samples": n_samples,
        "seed": seed,
        "quad_points": quad_points,
        "region": region,
    }
    _execute(ctx, "verify-ineq", params, output_dir, output_format, stem)


@cli.command()
@click.option("--freqs", "frequencies", callback=_int_list, default=None,
              help="Comma separated distinct frequencies")
@click.option("--n", type=int, default=None, help="Use frequencies 0..n-1")
@click.option("--measure", type=float, default=None, help="Arc measure |E|")
@click.option("--center", type=float, default=None, help="Arc midpoint")
@click.option("--study", is_flag=True, help="Sweep n and fit the growth constant")
@click.option("--n-values", "n_values", callback=_int_list, default=None)
@output_options
@click.pass_context
def nazarov(ctx, frequencies, n, measure, center, study, n_values, output_dir,
            output_format, stem):
    """Extremal full-circle to arc energy ratio of trigonometric polynomials."""
    params = {
        "frequencies": frequencies,
        "n": n,
        "measure": measure,
        "center": center,
        "study": study,
        "n_values": n_values,
    }
    _execute(ctx, "nazarov", params, output_dir, output_format, stem)


@cli.command()
@click.option("--eps", type=float, required=True, help="Interval half-width")
@click.option("--h", type=float, default=None)
@click.option("--z", type=float, default=None)
@click.option("--k", "K", type=int, default=None, help="Mode cutoff")
@click.option("--strip", is_flag=True, help="Strip (-eps, eps) x T^1 instead of an interval")
@click.option("--ky", "Ky", type=int, default=None, help="Transverse cutoff for --strip")
@output_options
@click.pass_context
def helmholtz1d(ctx, eps, h, z, K, strip, Ky, output_dir, output_format, stem):
    """Extremal constant of the 1-D Helmholtz observability estimate."""
    params = {"eps": eps, "h": h, "z": z, "K": K, "strip": strip, "Ky": Ky}
    _execute(ctx, "helmholtz1d", params, output_dir, output_format, stem)


@cli.command()
@click.option("--eps-list", "eps_list", callback=_float_list, default=None,
              help="Comma separated radii")
@click.option("--n-max", "N_max", type=int, default=None)
@click.option("--region", type=REGIONS, default=None)
@click.option("--workers", type=int, default=None)
@output_options
@click.pass_context
def scaling(ctx, eps_list, N_max, region, workers, output_dir, output_format, stem):
    """Observability constants across eps with both scaling fits."""
    params = {"eps_list": eps_list, "N_max": N_max, "region": region, "workers": workers}
    _execute(ctx, "scaling", params, output_dir, output_format, stem)


# --- plots -----------------------------------------------------------------


@cli.command()
@click.option("--report", type=click.Path(), required=True, help="CSV or JSON report")
@click.option("--kind", type=click.Choice(["scatter", "line"]), default="line")
@click.option("--output", type=click.Path(), default=None, help="SVG path")
@click.option("--x", default=None, help="x column")
@click.option("--y", default=None, help="y column")
@click.option("--loglog/--linear", default=None, help="Axis scaling (inferred by default)")
@output_options
@click.pass_context
def plot(ctx, report, kind, output, x, y, loglog, output_dir, output_format, stem):
    """Render a report table as an SVG scatter or line plot."""
    params = {"report": report, "kind": kind, "output": output, "x": x, "y": y, "loglog": loglog}
    _execute(ctx, "plot", params, output_dir, output_format, stem)


@cli.command()
def config_show():
    """Show current configuration."""
    try:
        config = get_config()
        config_dict = config.to_dict()

        console.print("\n[bold]Current Configuration:[/bold]\n")
        for section in ("lattice", "geodesics", "spectral", "observability", "processing"):
            console.print(f"[cyan]{section}:[/cyan]")
            for key, value in (config_dict.get(section) or {}).items():
                console.print(f"  {key}: {value}")

        console.print("\n[cyan]Output:[/cyan]")
        console.print(f"  Reports: {config.get_output_dir('reports_dir')}")
        console.print(f"  Logs: {config.get_output_dir('logs_dir')}\n")

    except Exception as e:
        console.print(f"\n[red]Error: {e}[/red]\n")
        sys.exit(EXIT_ERROR)


def run(argv: Optional[Sequence[str]] = None) -> int:
    """
    Run the CLI without exiting the interpreter.

    Returns:
        0 on pass, 2 on a falsified assertion, 1 on usage or numerical errors
    """
    try:
        result = cli.main(
            args=list(argv) if argv is not None else None,
            prog_name="torusobs",
            standalone_mode=False,
        )
    except click.ClickException as e:
        e.show()
        return EXIT_ERROR
    except click.exceptions.Abort:
        return EXIT_ERROR
    return result if isinstance(result, int) else EXIT_PASS


if __name__ == "__main__":
    sys.exit(run())
