"""Time-series forecasting with string invariants, tuned by a genetic algorithm."""

__version__ = "0.1.0"

from .errors import DataError, NumericalError, ParameterError, PMBSIError, PositivityError, WindowError
from .ga import EvolutionTrace, GAConfig, Genotype, evolve
from .invariant import AuxVariables, StringParams, compute_aux, compute_C, invariant_drift, weight
from .metrics import ErrorSummary, mae, smape
from .predictor import Forecast, ForecastRun, Substitution, iterated_predict, naive_forecast, \
    predict_one, predict_range
from .series import SplitSpec, TimeSeries, load_series, shift_positive, split_three, unshift
from .stringmap import p1_map, p1_q_map, p2_q_map

__all__ = [
    "AuxVariables", "DataError", "ErrorSummary", "EvolutionTrace", "Forecast", "ForecastRun",
    "GAConfig", "Genotype", "NumericalError", "PMBSIError", "ParameterError", "PositivityError",
    "SplitSpec", "StringParams", "Substitution", "TimeSeries", "WindowError", "compute_C",
    "compute_aux", "evolve", "invariant_drift", "iterated_predict", "load_series", "mae",
    "naive_forecast", "p1_map", "p1_q_map", "p2_q_map", "predict_one", "predict_range",
    "shift_positive", "smape", "split_three", "unshift", "weight",
]
