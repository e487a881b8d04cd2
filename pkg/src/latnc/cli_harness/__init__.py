"""Config-driven experiment runner and its command-line front end."""
from .config import SCHEMES, ExperimentConfig, config_to_json, parse_config, validate
from .experiments import run_experiment
from .results import COLUMNS, ResultRow, rows_from_csv, rows_from_json, rows_to_csv, rows_to_json, write_results

__all__ = [
    "SCHEMES",
    "ExperimentConfig",
    "config_to_json",
    "parse_config",
    "validate",
    "run_experiment",
    "COLUMNS",
    "ResultRow",
    "rows_from_csv",
    "rows_from_json",
    "rows_to_csv",
    "rows_to_json",
    "write_results",
]
