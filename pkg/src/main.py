import argparse
import sys
from pathlib import Path
from typing import List, Optional

from .bench.checks import run_self_checks
from .bench.config import ExperimentConfig, load_experiment_config
from .bench.runner import seed_data, train_seed
from .bench.summary import SummaryRow
from .cli import LabConsole
from .config import settings
from .constants.status import ExitCode
from .dualnet.model import neutral_from_spec
from .dualnet.serialization import load_weights, save_weights
from .exceptions.handler import ConfigError, FileOperationError, LabError, format_error_message
from .graphs.workflow import create_run_workflow
from .utils.logging import set_global_level

WEIGHTS_FILE = "weights_seed{seed}.bin"


def parse_args(argv: Optional[List[str]] = None) -> argparse.Namespace:
    parser = argparse.ArgumentParser(prog="ittt", description="Idempotent test-time training laboratory")
    parser.add_argument("--log-level", type=str, default=None, help="Override ITTT_LOG_LEVEL")
    commands = parser.add_subparsers(dest="command", required=True)

    run = commands.add_parser("run", help="Train, adapt and report the full experiment grid")
    run.add_argument("config", type=str, help="Experiment config JSON")

    train = commands.add_parser("train", help="Fit the model of the first seed and save its weights")
    train.add_argument("config", type=str, help="Experiment config JSON")
    train.add_argument("--out", type=str, default=None, help="Weights file (default: <output_path>/weights_seed<N>.bin)")

    adapt = commands.add_parser("adapt", help="Run the grid from pretrained weights, skipping the fit")
    adapt.add_argument("config", type=str, help="Experiment config JSON")
    adapt.add_argument("--weights", type=str, required=True, help="Weights file written by `ittt train`")

    commands.add_parser("check", help="Gradient and invariant self-checks")
    return parser.parse_args(argv)


def _load_config(path: str) -> ExperimentConfig:
    return load_experiment_config(path, seed_override=settings.seed)


def run_command(cli: LabConsole, config_path: str, weights: Optional[str] = None) -> ExitCode:
    cfg = _load_config(config_path)
    cli.print_header("adapt" if weights else "run", config_path)
    cli.print_info(f"{len(cfg.seeds)} seed(s), methods {', '.join(m.value for m in cfg.methods)}, batch sizes {cfg.batch_sizes}")

    app = create_run_workflow(show_progress=False)
    with cli.progress("Running experiment grid..."):
        state = app.invoke({"config": cfg, "weights": weights})

    cli.print_summary([SummaryRow(**row) for row in state.get("summary", [])])
    cli.print_studies(state.get("studies", []))
    for kind, path in state.get("files", {}).items():
        cli.print_info(f"{kind}: {path}")

    aborted = state.get("aborted_cells", 0)
    if aborted:
        cli.print_warning(f"{aborted} aborted cell(s); see the error field in {cfg.output_path}")
        return ExitCode.ABORTED
    cli.print_success("Experiment complete")
    return ExitCode.SUCCESS


def train_command(cli: LabConsole, config_path: str, out: Optional[str] = None) -> ExitCode:
    cfg = _load_config(config_path)
    seed = cfg.seeds[0]
    cli.print_header("train", config_path)

    dataset, _ = seed_data(cfg, seed)
    with cli.progress(f"Training seed {seed}..."):
        model, report = train_seed(cfg, seed, dataset)

    path = Path(out) if out else Path(cfg.output_path) / WEIGHTS_FILE.format(seed=seed)
    save_weights(model, path)
    cli.print_info(f"{report.epochs_run} epoch(s), final loss {report.final_loss:.6g}" if report.final_loss is not None else "no epochs run")
    cli.print_success(f"Weights saved to {path}")
    return ExitCode.SUCCESS


def adapt_command(cli: LabConsole, config_path: str, weights: str) -> ExitCode:
    cfg = _load_config(config_path)
    try:
        dataset, _ = seed_data(cfg, cfg.seeds[0])
        load_weights(weights, neutral=neutral_from_spec(cfg.model, dataset.label_dim))
    except FileOperationError as e:
        raise ConfigError(f"Unusable weights: {e.message}", weights) from e
    return run_command(cli, config_path, weights=weights)


def check_command(cli: LabConsole) -> ExitCode:
    cli.print_header("check")
    with cli.progress("Running self-checks..."):
        results = run_self_checks()
    cli.print_checks(results)

    failed = [r.name for r in results if not r.passed]
    if failed:
        cli.print_error(f"{len(failed)} check(s) failed: {', '.join(failed)}")
        return ExitCode.ABORTED
    cli.print_success(f"All {len(results)} checks passed")
    return ExitCode.SUCCESS


def main(argv: Optional[List[str]] = None) -> int:
    args = parse_args(argv)
    if args.log_level:
        settings.log_level = args.log_level.upper()
        set_global_level(settings.log_level)
    cli = LabConsole()

    try:
        if args.command == "run":
            code = run_command(cli, args.config)
        elif args.command == "train":
            code = train_command(cli, args.config, args.out)
        elif args.command == "adapt":
            code = adapt_command(cli, args.config, args.weights)
        else:
            code = check_command(cli)
    except ConfigError as e:
        cli.print_error(format_error_message(e, "Configuration error"))
        code = ExitCode.CONFIG_ERROR
    except LabError as e:
        cli.print_error(format_error_message(e))
        code = ExitCode.ABORTED
    except KeyboardInterrupt:
        cli.print_warning("Interrupted by user")
        code = ExitCode.ABORTED

    return int(code)


if __name__ == "__main__":
    sys.exit(main())
