"""CLI entry point for the piecewise holomorphic systems toolkit."""

import io
import logging
import sys

import click
import numpy as np
from rich.markup import escape
from rich.progress import Progress, SpinnerColumn, TextColumn

from . import __version__
from .config import Config
from .crossing_solver import (
    CrossingError,
    bezout_bound,
    build_crossing_system,
    solve_circle_class,
    solve_cycles,
)
from .field_core import FieldError, UnsupportedField, level_function
from .geometry import GeometryError, classify
from .melnikov import MelnikovError, assemble, choose_coefficients, count_simple_zeros, melnikov_basis
from .output_formatter import (
    console,
    export_json,
    export_melnikov_csv,
    export_portrait_csv,
    export_trajectory_csv,
    print_cycles,
    print_error,
    print_header,
    print_melnikov_summary,
    print_trajectory_summary,
    print_verify_report,
    to_json,
    write_melnikov_csv,
    write_portrait_csv,
    write_trajectory_csv,
)
from .poincare import PoincareError
from .pwhs_system import FlowError, SlidingEncountered, TangencyEncountered, flow, transform_system
from .run_config import ConfigError, RunConfig, load_run_config, system_to_spec
from .verify import CHECKS, run_verification

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_HALT = 2
EXIT_INTERRUPTED = 130

DOMAIN_ERRORS = (ConfigError, ValueError, FieldError, GeometryError, MelnikovError,
                 CrossingError, PoincareError, FlowError)


def _emit(text: str, out: str = None) -> None:
    """Write text to a file, or to stdout when no path is given."""
    if out:
        with open(out, "w", newline="", encoding="utf-8") as f:
            f.write(text)
    else:
        click.echo(text, nl=False)


def _load(config_path: str, *sections: str) -> RunConfig:
    config = load_run_config(config_path)
    for section in sections:
        config.require(section)
    return config


def _run(action, verbose: bool = False) -> None:
    """Run a command body and map its failures to exit codes."""
    try:
        action()
    except (TangencyEncountered, SlidingEncountered) as e:
        print_error(str(e), "Halted")
        sys.exit(EXIT_HALT)
    except DOMAIN_ERRORS as e:
        print_error(str(e))
        sys.exit(EXIT_ERROR)
    except KeyboardInterrupt:
        print_error("Operation cancelled by user.", "Interrupted")
        sys.exit(EXIT_INTERRUPTED)
    except Exception as e:
        print_error(str(e), "Unexpected Error")
        if verbose:
            console.print_exception()
        sys.exit(EXIT_ERROR)


@click.group(name="pwhs")
@click.version_option(__version__, prog_name="pwhs")
@click.option("-v", "--verbose", is_flag=True, help="Show detailed progress information")
@click.pass_context
def cli(ctx: click.Context, verbose: bool):
    """
    Simulate and analyse three-zone piecewise holomorphic systems.

    Example:

        python -m src.main simulate --config configs/strip_lc1.json --out orbit.csv

        python -m src.main verify
    """
    if verbose:
        logging.basicConfig(level=logging.INFO, format="%(levelname)s %(name)s: %(message)s")
    try:
        Config.validate()
    except ValueError as e:
        print_error(str(e), "Configuration Error")
        sys.exit(EXIT_ERROR)
    ctx.obj = {"verbose": verbose}


config_option = click.option("-c", "--config", "config_path", required=True,
                             type=click.Path(dir_okay=False), help="JSON run configuration")
out_option = click.option("-o", "--out", default=None, type=click.Path(dir_okay=False),
                          help="Output file (stdout when omitted)")


@cli.command()
@config_option
@out_option
@click.pass_context
def simulate(ctx: click.Context, config_path: str, out: str):
    """Integrate one trajectory and write it as CSV."""

    def action():
        config = _load(config_path, "system", "simulate")
        spec = config.simulate
        try:
            trajectory = flow(config.system, spec.start, spec.max_time, spec.max_crossings, spec.direction)
        except (TangencyEncountered, SlidingEncountered) as e:
            if e.trajectory is not None and e.trajectory.segments:
                _write_trajectory(e.trajectory, out)
            raise
        _write_trajectory(trajectory, out)
        if out:
            print_header("Trajectory", config.system.name or config_path)
            print_trajectory_summary(trajectory)

    _run(action, ctx.obj["verbose"])


def _write_trajectory(trajectory, out: str) -> None:
    if out:
        path = export_trajectory_csv(trajectory, out)
        console.print(f"[green]Trajectory written to:[/green] {escape(str(path))}")
    else:
        buffer = io.StringIO()
        write_trajectory_csv(trajectory, buffer)
        _emit(buffer.getvalue())


def portrait_rows(config: RunConfig) -> list[tuple]:
    """Level values on a grid (per zone) and sample orbits, as long-format rows."""
    system, spec = config.system, config.portrait
    xs = np.linspace(*spec.x_range, spec.grid)
    ys = np.linspace(*spec.y_range, spec.grid)
    rows = []
    for zone, f in system.fields.items():
        try:
            level = level_function(f)
        except UnsupportedField as e:
            logger.warning(f"zone {zone.value}: no level function ({e})")
            continue
        for y in ys:
            for x in xs:
                if classify(system.config, complex(x, y)) != zone:
                    continue
                try:
                    value = float(level(x, y))
                except (ZeroDivisionError, FloatingPointError):
                    continue
                if np.isfinite(value):
                    rows.append(("level", 0, zone.value, float(x), float(y), value))
    for i, start in enumerate(spec.starts):
        try:
            trajectory = flow(system, start, max_time=spec.max_time, max_crossings=spec.max_crossings)
        except FlowError as e:
            logger.warning(f"orbit {i} from {start}: {e}")
            trajectory = e.trajectory
            if trajectory is None or not trajectory.segments:
                continue
        for t, re, im, zone, _ in trajectory.rows():
            rows.append(("orbit", i, zone, re, im, t))
    return rows


@cli.command()
@config_option
@out_option
@click.pass_context
def portrait(ctx: click.Context, config_path: str, out: str):
    """Write level-function grids and sample orbits as plot-ready CSV."""

    def action():
        config = _load(config_path, "system", "portrait")
        with np.errstate(divide="ignore", invalid="ignore"):
            rows = portrait_rows(config)
        if out:
            path = export_portrait_csv(rows, out)
            console.print(f"[green]Portrait data written to:[/green] {escape(str(path))} ({len(rows)} rows)")
        else:
            buffer = io.StringIO()
            write_portrait_csv(rows, buffer)
            _emit(buffer.getvalue())

    _run(action, ctx.obj["verbose"])


@cli.command(name="melnikov")
@config_option
@out_option
@click.option("--report", default=None, type=click.Path(dir_okay=False),
              help="JSON file for the coefficients and located zeros")
@click.pass_context
def melnikov_cmd(ctx: click.Context, config_path: str, out: str, report: str):
    """Sample a closed Melnikov series and locate its simple zeros."""

    def action():
        config = _load(config_path, "melnikov")
        spec = config.melnikov
        basis = melnikov_basis(spec.basis)
        if spec.targets is not None:
            alpha = choose_coefficients(basis, spec.targets)
        else:
            alpha = assemble(spec.basis, spec.coefficients)

        def series(r: float) -> float:
            return float(alpha @ basis.evaluate(r)[0])

        rs = np.linspace(*spec.r_range, spec.samples)
        samples = [(float(r), series(r)) for r in rs]
        _, zeros = count_simple_zeros(series, spec.r_range, grid_n=max(2000, spec.samples))

        if out:
            path = export_melnikov_csv(samples, out)
            print_header("Melnikov function", spec.basis.value)
            print_melnikov_summary(spec.basis.value, list(alpha), zeros)
            console.print(f"[green]Samples written to:[/green] {escape(str(path))}")
        else:
            buffer = io.StringIO()
            write_melnikov_csv(samples, buffer)
            _emit(buffer.getvalue())
        if report:
            export_json({"basis": spec.basis.value, "coefficients": alpha, "zeros": zeros,
                         "r_range": list(spec.r_range)}, report)

    _run(action, ctx.obj["verbose"])


@cli.command()
@config_option
@out_option
@click.pass_context
def cycles(ctx: click.Context, config_path: str, out: str):
    """Solve the crossing equations and report candidate limit cycles as JSON."""

    def action():
        config = _load(config_path, "system", "cycles")
        system, spec = config.system, config.cycles
        with Progress(SpinnerColumn(), TextColumn("[progress.description]{task.description}"),
                      console=console, transient=True, disable=not out) as progress:
            progress.add_task("Solving crossing equations...", total=None)
            if spec.circle_class is not None:
                candidates = solve_circle_class(spec.circle_class, system.fields, spec.box,
                                                spec.seeds_per_axis, system.name)
                degree = None
            else:
                cs = build_crossing_system(system)
                candidates = solve_cycles(cs, spec.box, spec.seeds_per_axis, system.name)
                degree = cs.central_degree
        bound = bezout_bound(degree) if degree else None
        result = {
            "system": system.name,
            "candidates": [c.as_dict() for c in candidates],
            "valid": sum(1 for c in candidates if c.valid),
            "bound": bound,
        }
        _emit(to_json(result), out)
        if out:
            print_header("Crossing limit cycles", system.name or config_path)
            print_cycles(candidates, bound)

    _run(action, ctx.obj["verbose"])


@cli.command()
@config_option
@out_option
@click.pass_context
def transform(ctx: click.Context, config_path: str, out: str):
    """Push a system through a Möbius map and emit the transformed spec."""

    def action():
        config = _load(config_path, "system", "transform")
        transformed = transform_system(config.system, config.transform)
        document = {"system": system_to_spec(transformed), "map": list(config.transform.as_tuple())}
        _emit(to_json(document), out)
        if out:
            console.print(f"[green]Transformed system written to:[/green] {escape(out)} "
                          f"({transformed.config.kind.value})")

    _run(action, ctx.obj["verbose"])


@cli.command()
@out_option
@click.option("--only", multiple=True, type=click.Choice(list(CHECKS)), help="Run only these checks")
@click.pass_context
def verify(ctx: click.Context, out: str, only: tuple):
    """Run the reproduction suite; exit 1 if any check fails."""
    verbose = ctx.obj["verbose"]
    failed = False

    def action():
        nonlocal failed
        results = run_verification(list(only) or None)
        _emit(to_json({"checks": [r.as_dict() for r in results],
                       "passed": all(r.passed for r in results)}), out)
        if out:
            print_verify_report([r.as_dict() for r in results])
        failed = not all(r.passed for r in results)

    _run(action, verbose)
    if failed:
        sys.exit(EXIT_ERROR)


main = cli

if __name__ == "__main__":
    cli()
