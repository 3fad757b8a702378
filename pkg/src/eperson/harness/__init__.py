"""Configuration, run orchestration, trace persistence and export."""

from .config import ConfigError, RunConfig, config_from_dict, load_config
from .export import ExportError, export_plot_data
from .run import RunResult, run_one, sweep
from .validate import check_trace

__all__ = ["ConfigError", "ExportError", "RunConfig", "RunResult", "check_trace", "config_from_dict",
           "export_plot_data", "load_config", "run_one", "sweep"]
