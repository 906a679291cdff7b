"""Error measures and the fixed-weight sequential evaluation rollout."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .dataset import NormParams, Pattern, denormalize, pattern_arrays
from .errors import NumericDivergenceError
from .network import FeedbackMode, RidgePolyNet


def rmse(actual, forecast) -> float:
    """Root mean squared error between two equal-length value lists."""
    a = np.asarray(actual, dtype=float)
    f = np.asarray(forecast, dtype=float)
    if a.shape != f.shape or a.ndim != 1:
        raise ValueError(f"rmse needs two 1-D lists of equal length, got {a.shape} and {f.shape}")
    if a.size == 0:
        raise ValueError("rmse of empty lists is undefined")
    return math.sqrt(float(np.mean((a - f) ** 2)))


@dataclass
class EvalResult:
    """Per-step errors on the normalized scale plus both RMSE figures."""

    per_step_errors: np.ndarray
    rmse_normalized: float
    rmse_denormalized: float
    n: int


def evaluate(net: RidgePolyNet, patterns: list[Pattern], norm: NormParams,
             mode: FeedbackMode | None = None,
             burn_in: list[Pattern] | None = None) -> EvalResult:
    """Roll the network over the patterns in temporal order with weights
    fixed, updating only the feedback values (previous error uses the recorded
    desired value). Feedback state starts at 0.5/0.5, so the result is a pure
    function of (net, burn_in, patterns).

    ``burn_in`` patterns, when given, are rolled through first under the same
    regime and discarded; only the feedback state flows into the scored
    patterns. The harness burns in over the training patterns so the feedback
    values enter the out-of-sample stretch warmed up, the way a continuously
    deployed online model would.
    """
    if mode is not None and mode is not net.mode:
        raise ValueError(f"mode argument {mode} does not match the network's {net.mode}")
    n_scored = len(patterns)
    all_patterns = (burn_in or []) + patterns
    xs, targets = pattern_arrays(all_patterns)
    if xs.shape[1] != net.m_external:
        raise ValueError(
            f"pattern input length {xs.shape[1]} != network external input count {net.m_external}")
    wb, starts, _ = net.pack()
    forecasts = np.empty(len(all_patterns))
    status, bad_step = _kernels.rollout(wb, starts, xs, targets,
                                        net.mode.has_error, net.mode.has_output,
                                        forecasts)
    if status != _kernels.OK:
        raise NumericDivergenceError(
            f"block product overflowed during evaluation at step {bad_step}",
            step_index=int(bad_step))
    targets = targets[-n_scored:]
    forecasts = forecasts[-n_scored:]
    errors = targets - forecasts
    return EvalResult(
        per_step_errors=errors,
        rmse_normalized=rmse(targets, forecasts),
        rmse_denormalized=rmse(denormalize(targets, norm), denormalize(forecasts, norm)),
        n=n_scored)


def forecasts_of(patterns: list[Pattern], result: EvalResult) -> np.ndarray:
    """Recover the forecast values from the logged errors (forecast = target - error)."""
    _, targets = pattern_arrays(patterns)
    return targets - result.per_step_errors


def save_forecast_csv(patterns: list[Pattern], result: EvalResult,
                      norm: NormParams, path) -> None:
    """Dump t, actual, forecast and error on the de-normalized scale."""
    if len(patterns) != result.n:
        raise ValueError("pattern list does not match the evaluation result")
    _, targets = pattern_arrays(patterns)
    forecasts = targets - result.per_step_errors
    actual_d = denormalize(targets, norm)
    forecast_d = denormalize(forecasts, norm)
    with open(path, "w") as fh:
        fh.write("t,actual,forecast,error\n")
        for p, a, f in zip(patterns, actual_d, forecast_d):
            fh.write(f"{p.t_index},{repr(float(a))},{repr(float(f))},{repr(float(a - f))}\n")
