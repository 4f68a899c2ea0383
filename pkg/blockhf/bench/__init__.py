"""
The experiment harness: configs, training runs, metrics and self-checks.
"""

from .config import ExperimentConfig, load_config, parse_config
from .metrics import MetricsRow, MetricsWriter, read_metrics
from .runner import RunResult, load_datasets, run_experiment
from .verify import Check, format_report, run_suite

__all__ = [
    "Check",
    "ExperimentConfig",
    "MetricsRow",
    "MetricsWriter",
    "RunResult",
    "format_report",
    "load_config",
    "load_datasets",
    "parse_config",
    "read_metrics",
    "run_experiment",
    "run_suite",
]
