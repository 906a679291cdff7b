"""Ridge polynomial neural networks with error/output feedback, trained
online with forward sensitivity propagation and constructive block growth."""

from .dataset import (MgParams, NormParams, Pattern, Series, build_patterns,
                      denormalize, generate_mackey_glass, load_series_csv,
                      normalize, save_patterns_csv, save_series_csv,
                      split_patterns)
from .errors import (ConfigError, DegenerateRangeError, GrowthExhaustedError,
                     NumericDivergenceError)
from .harness import (ExperimentConfig, ExperimentReport, benchmark,
                      emit_comparison, load_config, prepare_data,
                      run_experiment, run_single, save_config,
                      write_report_csv)
from .metrics import EvalResult, evaluate, rmse, save_forecast_csv
from .network import (FeedbackMode, ForwardTrace, PiSigmaBlock, RidgePolyNet,
                      SigmaUnit, add_block, assemble_inputs, forward,
                      load_model, new_network, save_model, sigmoid)
from .trainer import (BlockAddition, EpochStats, GradientMode,
                      GradientCheckReport, GrowthHistory, RtrlState,
                      TrainerConfig, constructive_fit, gradient_check,
                      reset_state, rtrl_step, train_epoch)

__version__ = "0.1.0"

__all__ = [
    "MgParams", "NormParams", "Pattern", "Series", "build_patterns",
    "denormalize", "generate_mackey_glass", "load_series_csv", "normalize",
    "save_patterns_csv", "save_series_csv", "split_patterns",
    "ConfigError", "DegenerateRangeError", "GrowthExhaustedError",
    "NumericDivergenceError",
    "ExperimentConfig", "ExperimentReport", "benchmark", "emit_comparison",
    "load_config", "prepare_data", "run_experiment", "run_single",
    "save_config", "write_report_csv",
    "EvalResult", "evaluate", "rmse", "save_forecast_csv",
    "FeedbackMode", "ForwardTrace", "PiSigmaBlock", "RidgePolyNet",
    "SigmaUnit", "add_block", "assemble_inputs", "forward", "load_model",
    "new_network", "save_model", "sigmoid",
    "BlockAddition", "EpochStats", "GradientMode", "GradientCheckReport",
    "GrowthHistory", "RtrlState", "TrainerConfig", "constructive_fit",
    "gradient_check", "reset_state", "rtrl_step", "train_epoch",
]
