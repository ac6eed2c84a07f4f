"""Experiment configs, presets, the sweep runner, plot data and the CLI."""

from .analysis import combined_sigma, crossing_point, loglog_slope
from .config import ConfigError, ExperimentConfig
from .families import build_family, build_single_mechanism
from .plotdata import SchemaError, emit_plot_data
from .presets import get_preset, preset_names
from .runner import ExperimentResult, GridPoint, grid_points, improvement_pct, run_experiment

__all__ = [
    "ConfigError",
    "ExperimentConfig",
    "ExperimentResult",
    "GridPoint",
    "SchemaError",
    "build_family",
    "build_single_mechanism",
    "combined_sigma",
    "crossing_point",
    "emit_plot_data",
    "get_preset",
    "grid_points",
    "improvement_pct",
    "loglog_slope",
    "preset_names",
    "run_experiment",
]
