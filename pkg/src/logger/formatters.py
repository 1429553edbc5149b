"""Figure data files and console formatting of reports."""

import csv
import io
from pathlib import Path
from typing import TYPE_CHECKING

from logger.models import ExperimentReport

if TYPE_CHECKING:
    from sweep import RobustnessGrid

BARS_FILE = "bars.csv"
CHANNELS_FILE = "channels.csv"
ROBUSTNESS_FILE = "robustness.csv"


def _fmt(value) -> str:
    """Render a cell; floats use repr so files are byte-reproducible."""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _render_csv(header: list[str], rows: list[list]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_fmt(v) for v in row])
    return buffer.getvalue()


def bar_rows(report: ExperimentReport) -> list[list]:
    """Rows (n, true rho_n, inferred q_n) up to the larger cutoff."""
    true = report.true_distribution
    inferred = report.inferred_distribution
    cutoff = max(true.cutoff, inferred.cutoff if inferred else 0)
    p = true.padded(cutoff)
    q = inferred.padded(cutoff) if inferred else [0.0] * (cutoff + 1)
    return [[n, float(p[n]), float(q[n])] for n in range(cutoff + 1)]


def channel_rows(report: ExperimentReport) -> list[list]:
    return [
        [r.eta.eta, r.shots, r.off_count, r.frequency, d.p_exact, d.model_bias]
        for r, d in zip(report.records, report.diagnostics)
    ]


def grid_rows(grid: "RobustnessGrid") -> list[list]:
    """One row per cell in grid order: N1 offsets outer, N2 offsets inner."""
    rows = []
    for i, d1 in enumerate(grid.n1_offsets):
        for j, d2 in enumerate(grid.n2_offsets):
            rows.append(
                [
                    d1,
                    d2,
                    grid.n1_values[i],
                    grid.n2_values[j],
                    grid.fidelity[i][j],
                    grid.physical[i][j],
                    grid.status[i][j],
                ]
            )
    return rows


def emit_figure_data(report_or_grid, output_dir: str | Path) -> list[str]:
    """Write plot-ready files for a report (bars, channels) or a grid (matrix).

    Args:
        report_or_grid: ExperimentReport or RobustnessGrid
        output_dir: Directory receiving the files

    Returns:
        Names of the files written

    Raises:
        OSError: If the directory or files cannot be written
    """
    output_dir = Path(output_dir)
    output_dir.mkdir(parents=True, exist_ok=True)

    if isinstance(report_or_grid, ExperimentReport):
        files = {
            BARS_FILE: _render_csv(["n", "true", "inferred"], bar_rows(report_or_grid)),
            CHANNELS_FILE: _render_csv(
                ["eta", "shots", "off_count", "frequency", "p_exact", "model_bias"],
                channel_rows(report_or_grid),
            ),
        }
    else:
        files = {
            ROBUSTNESS_FILE: _render_csv(
                ["n1_offset", "n2_offset", "n1", "n2", "fidelity", "physical", "status"],
                grid_rows(report_or_grid),
            )
        }

    for name, text in files.items():
        with open(output_dir / name, "w", encoding="utf-8", newline="") as f:
            f.write(text)
    return list(files)


def format_report_as_table(report: ExperimentReport) -> str:
    """Format a report as a readable summary.

    Args:
        report: Report to format

    Returns:
        Formatted table string
    """
    config = report.config
    lines = [
        "=" * 80,
        f"Experiment: {config.get('name')}",
        f"State: {config.get('state')}",
        f"Estimator: {config.get('estimator')}   Seed: {report.seed}",
        f"Status: {report.status}",
        "-" * 80,
        f"{'eta':>8} {'shots':>16} {'off':>16} {'frequency':>12} {'model bias':>12}",
    ]
    for r, d in zip(report.records, report.diagnostics):
        lines.append(
            f"{r.eta.eta:>8.4f} {r.shots:>16d} {r.off_count:>16d} "
            f"{r.frequency:>12.8f} {d.model_bias:>12.3e}"
        )

    if report.moments:
        m = report.moments
        lines.extend(
            [
                "-" * 80,
                f"N1 = {m.n1:.6f}   N2 = {m.n2:.6f}   Q = {m.mandel_q:+.4f}",
                f"MaxLik: converged={m.converged} iterations={m.iterations} "
                f"|grad|={m.gradient_norm:.2e}",
            ]
        )
    if report.state:
        s = report.state
        lambdas = ", ".join(f"{v:.6g}" for v in s.lambdas) or f"point mass at {s.point_mass}"
        lines.extend(
            [
                "-" * 80,
                f"MaxEnt ({s.observation_level.value}): lambdas = ({lambdas})",
                f"cutoff={s.cutoff} converged={s.converged} max|residual|={s.max_residual:.2e}",
            ]
        )
    if report.fidelity is not None:
        lines.extend(["-" * 80, f"Fidelity: {report.fidelity:.6f}"])
    if report.error_message:
        lines.extend(["-" * 80, f"Error: {report.error_message}"])
    if report.timings:
        lines.append("-" * 80)
        lines.extend(f"{t.stage:<10} {t.duration_ms:10.2f}ms" for t in report.timings)

    lines.append("=" * 80)
    return "\n".join(lines)
