"""Reproducible experiment runners: dilation-order sweep and cycle-dimension survey."""

from .datasets import DATASETS, Series, load_series, synthetic_series
from .plotting import emit_plots
from .reference import fit_forecast_readout, make_reference_system, pi_signs
from .runs import (
    DilationRow,
    ExperimentConfig,
    MatchingRow,
    run_dilation_experiment,
    run_matching_experiment,
    summarize_dilation,
    summarize_matching,
)

__all__ = [
    "DATASETS", "Series", "load_series", "synthetic_series", "emit_plots", "fit_forecast_readout",
    "make_reference_system", "pi_signs", "DilationRow", "ExperimentConfig", "MatchingRow",
    "run_dilation_experiment", "run_matching_experiment", "summarize_dilation", "summarize_matching",
]
