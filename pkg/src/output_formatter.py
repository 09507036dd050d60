"""Output formatting module for console summaries and CSV/JSON export."""

import csv
import json
from pathlib import Path
from typing import Any, Iterable, TextIO

from rich.console import Console
from rich.markup import escape
from rich.panel import Panel
from rich.table import Table
from tabulate import tabulate

from .config import Config
from .crossing_solver import CycleCandidate
from .pwhs_system import Trajectory
from .utils import format_float, jsonable


console = Console()
err_console = Console(stderr=True)


def _fmt(value: Any) -> str:
    if isinstance(value, float):
        return f"{value:.10g}"
    if value is None:
        return "-"
    return str(value)


def print_table(title: str, headers: list[str], rows: Iterable[Iterable[Any]], max_rows: int = None) -> None:
    """
    Print rows as a rich table, or as plain text when stdout is not a terminal.

    Args:
        title: Table title
        headers: Column names
        rows: Row values
        max_rows: Maximum rows to display (None for all)
    """
    rows = [[_fmt(v) for v in row] for row in rows]
    shown = rows[:max_rows] if max_rows else rows

    if not console.is_terminal:
        console.print(title)
        console.print(tabulate(shown, headers=headers, tablefmt="simple"), markup=False, highlight=False)
    else:
        table = Table(title=title, show_header=True, header_style="bold cyan")
        for header in headers:
            table.add_column(header, justify="right")
        for row in shown:
            table.add_row(*(escape(cell) for cell in row))
        console.print(table)

    if max_rows and len(rows) > max_rows:
        console.print(f"[dim]Showing {max_rows} of {len(rows)} rows. See the output file for all of them.[/dim]")


def print_header(title: str, subtitle: str = "") -> None:
    """Print a boxed command header."""
    body = f"[bold]{escape(title)}[/bold]" + (f"\n[cyan]{escape(subtitle)}[/cyan]" if subtitle else "")
    console.print()
    console.print(Panel(body, expand=False))


def print_error(message: str, kind: str = "Error") -> None:
    """Print an error message to stderr."""
    err_console.print(f"[red]{kind}:[/red] {escape(message)}")


def print_trajectory_summary(trajectory: Trajectory) -> None:
    """Crossing events and closure of a trajectory."""
    rows = [(i + 1, e.t, e.z.real, e.z.imag, e.boundary_id, f"{e.from_zone.value} -> {e.to_zone.value}")
            for i, e in enumerate(trajectory.events)]
    print_table("Boundary crossings", ["#", "t", "Re z", "Im z", "boundary", "zones"], rows)
    console.print(
        f"\n[green]Duration:[/green] {trajectory.duration:.10g}  |  "
        f"[green]Crossings:[/green] {len(trajectory.events)}  |  "
        f"[green]|end - start|:[/green] {abs(trajectory.end - trajectory.start):.3e}\n"
    )


def print_melnikov_summary(basis: str, coefficients: list[float], zeros: list[float]) -> None:
    print_table(f"Melnikov coefficients ({basis})", ["i", "alpha_i"],
                [(i + 1, float(c)) for i, c in enumerate(coefficients)])
    if not zeros:
        console.print("[yellow]No simple zeros in the sampled range.[/yellow]")
        return
    print_table("Simple zeros", ["#", "r"], [(i + 1, z) for i, z in enumerate(zeros)])


def print_cycles(candidates: list[CycleCandidate], bound: int = None) -> None:
    """Candidate cycles with validity and closure."""
    rows = [
        (c.s1, c.s2, c.t1, c.t2, "yes" if c.valid else "no", c.closure_residual)
        for c in candidates
    ]
    print_table("Crossing cycle candidates", ["s1", "s2", "t1", "t2", "valid", "closure"], rows)
    valid = sum(1 for c in candidates if c.valid)
    summary = f"\n[green]Candidates:[/green] {len(candidates)}  |  [green]Valid:[/green] {valid}"
    if bound is not None:
        summary += f"  |  [green]Bound:[/green] {bound}"
    console.print(summary + "\n")


def print_verify_report(checks: list[dict]) -> None:
    rows = [(c["name"], "pass" if c["passed"] else "FAIL", c.get("detail", "")) for c in checks]
    print_table("Reproduction checks", ["check", "result", "detail"], rows)
    failed = [c["name"] for c in checks if not c["passed"]]
    if failed:
        console.print(f"[red]{len(failed)} of {len(checks)} checks failed.[/red]")
    else:
        console.print(f"[green]All {len(checks)} checks passed.[/green]")


# --------------------------------------------------------------------------
# CSV
# --------------------------------------------------------------------------

def write_rows_csv(headers: list[str], rows: Iterable[Iterable[Any]], stream: TextIO) -> None:
    """
    Write rows as CSV, floats in shortest round-trip form.

    Args:
        headers: Column names
        rows: Row values
        stream: Output stream to write to
    """
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(headers)
    for row in rows:
        writer.writerow([format_float(v) if isinstance(v, float) else v for v in row])


def _export(path: str, write, *args) -> str:
    target = Path(path)
    with open(target, "w", newline="", encoding="utf-8") as f:
        write(*args, f)
    return str(target.absolute())


TRAJECTORY_HEADERS = ["t", "re", "im", "zone", "event"]


def write_trajectory_csv(trajectory: Trajectory, stream: TextIO) -> None:
    """One row per sample; event = 1 on crossing points."""
    write_rows_csv(TRAJECTORY_HEADERS, trajectory.rows(), stream)


def export_trajectory_csv(trajectory: Trajectory, output_path: str) -> str:
    """
    Export a trajectory to a CSV file.

    Returns:
        The path to the created CSV file
    """
    return _export(output_path, write_trajectory_csv, trajectory)


def write_melnikov_csv(samples: list[tuple[float, float]], stream: TextIO) -> None:
    write_rows_csv(["r", "M"], samples, stream)


def export_melnikov_csv(samples: list[tuple[float, float]], output_path: str) -> str:
    return _export(output_path, write_melnikov_csv, samples)


PORTRAIT_HEADERS = ["kind", "index", "zone", "x", "y", "value"]


def write_portrait_csv(rows: list[tuple], stream: TextIO) -> None:
    """Level grids ("level") and orbit samples ("orbit") in one long table."""
    write_rows_csv(PORTRAIT_HEADERS, rows, stream)


def export_portrait_csv(rows: list[tuple], output_path: str) -> str:
    return _export(output_path, write_portrait_csv, rows)


# --------------------------------------------------------------------------
# JSON
# --------------------------------------------------------------------------

def to_json(data: Any) -> str:
    """Deterministic JSON: rounded floats, sorted keys, null for non-finite numbers."""
    return json.dumps(jsonable(data, Config.JSON_DIGITS), sort_keys=True, indent=2) + "\n"


def write_json(data: Any, stream: TextIO) -> None:
    stream.write(to_json(data))


def export_json(data: Any, output_path: str) -> str:
    return _export(output_path, write_json, data)
