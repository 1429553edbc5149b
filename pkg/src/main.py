import argparse
import asyncio
import json
import logging
import sys
from pathlib import Path

from config import ExperimentConfig, load_config
from errors import ReconstructionError
from estimation import ESTIMATORS
from logger import FileSystemLogger, load_report
from logger.file_logger import GRID_FILE, REPORT_FILE
from logger.formatters import emit_figure_data, format_report_as_table
from pipeline import run_ensemble, run_pipeline
from selfcheck import selfcheck
from sweep import RobustnessGrid, robustness_sweep

EXIT_SUCCESS = 0
EXIT_ERROR = 1
EXIT_UNPHYSICAL = 3
EXIT_NOT_CONVERGED = 4
EXIT_NEAR_DEGENERATE = 5

STATUS_EXIT_CODES = {
    "success": EXIT_SUCCESS,
    "unphysical": EXIT_UNPHYSICAL,
    "not_converged": EXIT_NOT_CONVERGED,
    "near_degenerate": EXIT_NEAR_DEGENERATE,
}

ENSEMBLE_FILE = "ensemble.json"


def get_cli_args(argv: list[str] | None = None) -> argparse.Namespace:
    """
    Parses command-line arguments.

    Returns:
        Namespace with the subcommand and its options.
    """
    parser = argparse.ArgumentParser(
        description="Reconstruct photon distributions from on/off detector statistics."
    )
    parser.add_argument(
        "-v",
        "--verbose",
        action="count",
        default=0,
        help="Increase log verbosity (-v info, -vv debug).",
    )
    subparsers = parser.add_subparsers(dest="command", required=True)

    def add_experiment_flags(sub):
        sub.add_argument("--config", required=True, help="Path to the experiment JSON config.")
        sub.add_argument("--output", default=None, help="Override the output directory.")
        sub.add_argument("--seed", type=int, default=None, help="Override the master seed.")
        sub.add_argument(
            "--estimator",
            choices=sorted(ESTIMATORS),
            default=None,
            help="Override the estimator.",
        )
        sub.add_argument(
            "--noiseless",
            action=argparse.BooleanOptionalAction,
            default=None,
            help="Use exact model probabilities instead of sampled frequencies.",
        )

    run = subparsers.add_parser("run", help="Simulate, estimate and score one experiment.")
    add_experiment_flags(run)

    sweep = subparsers.add_parser("sweep", help="Robustness grid over perturbed (N1, N2).")
    add_experiment_flags(sweep)
    sweep.add_argument("--workers", type=int, default=1, help="Threads for grid cells.")

    ensemble = subparsers.add_parser("ensemble", help="Repeat a run over a range of seeds.")
    add_experiment_flags(ensemble)
    ensemble.add_argument("--runs", type=int, default=100, help="Number of seeds.")
    ensemble.add_argument(
        "--threshold", type=float, default=0.99, help="Fidelity a run must exceed."
    )
    ensemble.add_argument("--workers", type=int, default=1, help="Threads for runs.")

    figures = subparsers.add_parser("figures", help="Re-emit figure data from a stored report.")
    figures.add_argument(
        "--report", required=True, help="report.json, grid.json, or a directory holding one."
    )
    figures.add_argument("--output", default=None, help="Directory for the data files.")

    subparsers.add_parser("selfcheck", help="Run the closed-form oracle checks.")

    return parser.parse_args(argv)


def configure_logging(verbosity: int) -> None:
    level = {0: logging.WARNING, 1: logging.INFO}.get(verbosity, logging.DEBUG)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")


def load_experiment(args: argparse.Namespace) -> ExperimentConfig:
    config = load_config(args.config)
    return config.with_overrides(
        seed=args.seed,
        output_dir=args.output,
        estimator=args.estimator,
        noiseless=args.noiseless,
    )


async def run_command(config: ExperimentConfig) -> int:
    report_logger = FileSystemLogger(config.output_dir)
    session_id = await report_logger.start_session("run")
    report = await asyncio.to_thread(run_pipeline, config)
    files = await report_logger.write_report(report)
    await report_logger.end_session(session_id, report.status)

    print(format_report_as_table(report))
    if report.status == "success":
        print(
            f"✅ Fidelity {report.fidelity:.6f}; "
            f"wrote {', '.join(files)} to {config.output_dir}"
        )
    else:
        print(f"⚠️ Run finished with status '{report.status}'; wrote {', '.join(files)}")
    return STATUS_EXIT_CODES[report.status]


async def sweep_command(config: ExperimentConfig, workers: int) -> int:
    report_logger = FileSystemLogger(config.output_dir)
    session_id = await report_logger.start_session("sweep")
    grid = await asyncio.to_thread(
        robustness_sweep, config.state, config.sweep, config.solver, workers
    )
    files = await report_logger.write_grid(grid)
    stalled = sum(s == "not_converged" for row in grid.status for s in row)
    status = "not_converged" if stalled else "success"
    await report_logger.end_session(session_id, status)

    rows, columns = grid.shape
    masked = sum(not p for row in grid.physical for p in row)
    marker = "⚠️" if stalled else "✅"
    print(
        f"{marker} {rows}x{columns} grid around "
        f"(N1, N2) = ({grid.base_n1:.4f}, {grid.base_n2:.4f}); "
        f"{masked} masked cell(s); {stalled} not converged; "
        f"min physical fidelity {grid.min_physical_fidelity():.6f}"
    )
    print(f"Wrote {', '.join(files)} to {config.output_dir}")
    return STATUS_EXIT_CODES[status]


async def ensemble_command(
    config: ExperimentConfig, runs: int, threshold: float, workers: int
) -> int:
    report_logger = FileSystemLogger(config.output_dir)
    session_id = await report_logger.start_session("ensemble")
    seeds = [config.design.seed + i for i in range(runs)]
    summary = await asyncio.to_thread(run_ensemble, config, seeds, threshold, workers)
    await report_logger.write_document(ENSEMBLE_FILE, summary.to_dict())
    await report_logger.end_session(session_id, "success")

    print(
        f"✅ {summary.passed}/{runs} runs above fidelity {threshold} "
        f"({summary.pass_fraction:.0%}); wrote {ENSEMBLE_FILE} to {config.output_dir}"
    )
    return EXIT_SUCCESS


def figures_command(source: str, output: str | None) -> int:
    path = Path(source)
    if path.is_dir():
        path = path / REPORT_FILE if (path / REPORT_FILE).exists() else path / GRID_FILE
    output_dir = Path(output) if output else path.parent

    if path.name == GRID_FILE:
        with open(path, "r", encoding="utf-8") as f:
            item = RobustnessGrid.from_dict(json.load(f))
    else:
        item = load_report(path)

    files = emit_figure_data(item, output_dir)
    print(f"✅ Wrote {', '.join(files)} to {output_dir}")
    return EXIT_SUCCESS


async def main(args: argparse.Namespace) -> int:
    """
    Dispatches the subcommand and maps its outcome to an exit status.
    """
    try:
        if args.command == "selfcheck":
            return EXIT_SUCCESS if selfcheck() else EXIT_ERROR
        if args.command == "figures":
            return figures_command(args.report, args.output)

        config = load_experiment(args)
        print(f"--- Running '{args.command}' for {config.name} ---")
        if args.command == "run":
            return await run_command(config)
        if args.command == "sweep":
            return await sweep_command(config, args.workers)
        return await ensemble_command(config, args.runs, args.threshold, args.workers)

    except ReconstructionError as e:
        print(f"❌ ERROR: {e}")
    except (OSError, json.JSONDecodeError) as e:
        print(f"❌ ERROR: Could not read or write files: {e}")
    except Exception as e:
        print(f"❌ ERROR: Unexpected error occurred: {e}")
    return EXIT_ERROR


if __name__ == "__main__":
    cli_args = get_cli_args()
    configure_logging(cli_args.verbose)
    sys.exit(asyncio.run(main(cli_args)))
