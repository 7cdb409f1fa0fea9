from .checks import CheckResult, run_self_checks
from .config import ExperimentConfig, LevelsSpec, StreamSpec, load_experiment_config, parse_experiment_config
from .datasets import CsvSource, SyntheticSpec, build_dataset, load_csv, synth_dataset
from .report import emit_report, read_records, read_studies
from .runner import ExperimentResult, run_experiment, run_grid, run_seed, seed_data, train_seed
from .summary import SummaryRow, spearman, summarize

__all__ = [
    "CheckResult",
    "run_self_checks",
    "ExperimentConfig",
    "LevelsSpec",
    "StreamSpec",
    "load_experiment_config",
    "parse_experiment_config",
    "CsvSource",
    "SyntheticSpec",
    "build_dataset",
    "load_csv",
    "synth_dataset",
    "emit_report",
    "read_records",
    "read_studies",
    "ExperimentResult",
    "run_experiment",
    "run_grid",
    "run_seed",
    "seed_data",
    "train_seed",
    "SummaryRow",
    "spearman",
    "summarize"
]
