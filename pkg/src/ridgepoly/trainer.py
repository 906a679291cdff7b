"""Online training with forward sensitivity propagation, plus the constructive
growth controller.

Training is strictly sequential: each step assembles the input from the
pattern and the previous step's feedback values, evaluates the network, and
updates the per-weight output sensitivities alongside the weights. Sensitivity
of the step error is never stored: it is the output sensitivity with opposite
sign, so the feedback carry coefficient folds both paths into
(output-feedback weight - error-feedback weight).

Two gradient modes are available. "paper" attaches the sensitivity carry to
the differentiated unit only, which is exact for an order-1 trainable block
and an approximation above that. "exact" propagates the carry through every
unit of every block (the product rule over the full block sum) and matches
full-sequence finite differences at any order.
"""

from __future__ import annotations

import copy
import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from . import _kernels
from .dataset import Pattern, pattern_arrays
from .errors import NumericDivergenceError
from .network import (FeedbackMode, RidgePolyNet, _feedback_columns,
                      add_block, new_network)


class GradientMode(Enum):
    PAPER = "paper"
    EXACT = "exact"

    @classmethod
    def from_name(cls, name: str) -> "GradientMode":
        try:
            return cls(name.strip().lower())
        except ValueError:
            raise ValueError(f"unknown gradient mode {name!r}; expected 'paper' or 'exact'") from None


# published topology bounds used by strict-mode validation
ETA_RANGE = (0.01, 1.0)
MOMENTUM_RANGE = (0.4, 0.8)
R_RANGE = (0.00001, 0.1)
R_DECAY_VALUES = (0.05, 0.2)
ETA_DECAY_VALUE = 0.8


@dataclass(frozen=True)
class TrainerConfig:
    """Learning rate, momentum, growth threshold and their decay factors,
    stopping bounds, weight initialization interval and seed.

    Any positive values are accepted; ``validate_strict`` additionally checks
    the published benchmark ranges.
    """

    eta: float = 0.25
    momentum: float = 0.4
    r_threshold: float = 0.0001
    eta_decay: float = 0.8
    r_decay: float = 0.05
    max_epochs: int = 3000
    max_blocks: int = 5
    init_low: float = -0.5
    init_high: float = 0.5
    seed: int = 0
    gradient_mode: GradientMode = GradientMode.PAPER
    freeze_grown: bool = True

    def __post_init__(self):
        if self.eta < 0:
            raise ValueError("eta must be >= 0")
        if self.momentum < 0:
            raise ValueError("momentum must be >= 0")
        if self.r_threshold <= 0:
            raise ValueError("r_threshold must be > 0")
        if not 0 < self.eta_decay <= 1:
            raise ValueError("eta_decay must be in (0, 1]")
        if not 0 < self.r_decay <= 1:
            raise ValueError("r_decay must be in (0, 1]")
        if self.max_epochs < 1:
            raise ValueError("max_epochs must be >= 1")
        if self.max_blocks < 1:
            raise ValueError("max_blocks must be >= 1")
        if not self.init_low < self.init_high:
            raise ValueError("init_low must be < init_high")

    @property
    def init_range(self) -> tuple[float, float]:
        return (self.init_low, self.init_high)

    def validate_strict(self) -> None:
        """Raise ValueError naming the violated published bound."""
        lo, hi = ETA_RANGE
        if not lo <= self.eta <= hi:
            raise ValueError(f"eta = {self.eta} outside the published range [{lo}, {hi}]")
        lo, hi = MOMENTUM_RANGE
        if not lo <= self.momentum <= hi:
            raise ValueError(f"momentum = {self.momentum} outside the published range [{lo}, {hi}]")
        lo, hi = R_RANGE
        if not lo <= self.r_threshold <= hi:
            raise ValueError(
                f"r_threshold = {self.r_threshold} outside the published range [{lo}, {hi}]")
        if self.r_decay not in R_DECAY_VALUES:
            raise ValueError(
                f"r_decay = {self.r_decay} not one of the published values {R_DECAY_VALUES}")
        if self.eta_decay != ETA_DECAY_VALUE:
            raise ValueError(f"eta_decay = {self.eta_decay} differs from the published {ETA_DECAY_VALUE}")
        if (self.init_low, self.init_high) != (-0.5, 0.5):
            raise ValueError(
                f"init range [{self.init_low}, {self.init_high}] differs from the published [-0.5, 0.5]")
        if self.max_epochs > 3000:
            raise ValueError(f"max_epochs = {self.max_epochs} exceeds the published 3000")
        if self.max_blocks > 5:
            raise ValueError(f"max_blocks = {self.max_blocks} exceeds the published 5")


@dataclass
class RtrlState:
    """Per-trainable-weight output sensitivities, the feedback values of the
    previous step, and the previous weight deltas (momentum memory).

    ``dy`` has one row per trainable unit; column 0 is the bias slot.
    """

    dy: np.ndarray
    prev_error: float
    prev_output: float
    prev_delta: np.ndarray

    def error_sensitivity(self) -> np.ndarray:
        """Sensitivity of the step error; exactly the negated output
        sensitivity (the desired value does not depend on the weights)."""
        return -self.dy


def reset_state(net: RidgePolyNet) -> RtrlState:
    """Zero sensitivities and momentum; feedback values start at 0.5 so the
    recursion does not begin at an exact zero."""
    shape = (net.n_trainable_units, 1 + net.n_inputs)
    return RtrlState(dy=np.zeros(shape), prev_error=0.5, prev_output=0.5,
                     prev_delta=np.zeros(shape))


@dataclass
class EpochStats:
    epoch: int
    sse: float
    block_count: int
    eta_used: float
    block_added: bool = False


@dataclass
class BlockAddition:
    epoch: int
    new_order: int
    eta_after: float
    r_after: float


@dataclass
class GrowthHistory:
    """Per-epoch statistics plus the block addition events."""

    epochs: list[EpochStats] = field(default_factory=list)
    additions: list[BlockAddition] = field(default_factory=list)

    @property
    def best_epoch(self) -> int:
        if not self.epochs:
            raise ValueError("empty history")
        best = min(self.epochs, key=lambda s: s.sse)
        return best.epoch

    @property
    def best_sse(self) -> float:
        return min(s.sse for s in self.epochs)

    def to_csv(self, path) -> None:
        with open(path, "w") as fh:
            fh.write("epoch,sse,block_count,eta_used,block_added\n")
            for s in self.epochs:
                fh.write(f"{s.epoch},{repr(s.sse)},{s.block_count},"
                         f"{repr(s.eta_used)},{int(s.block_added)}\n")


def _check_dims(net: RidgePolyNet, state: RtrlState, m_inputs: int) -> None:
    if m_inputs != net.m_external:
        raise ValueError(
            f"pattern input length {m_inputs} != network external input count {net.m_external}")
    shape = (net.n_trainable_units, 1 + net.n_inputs)
    if state.dy.shape != shape or state.prev_delta.shape != shape:
        raise ValueError(
            f"state arrays have shape {state.dy.shape}, network expects {shape}")


def _kernel_args(net: RidgePolyNet):
    wb, starts, unit_block = net.pack()
    err_col, out_col = _feedback_columns(net.mode, net.m_external)
    first_trainable = int(starts[net.frozen_count])
    return wb, starts, unit_block, first_trainable, err_col, out_col


def rtrl_step(net: RidgePolyNet, state: RtrlState, pattern: Pattern,
              cfg: TrainerConfig, eta: float | None = None) -> float:
    """One online step on a single pattern; mutates net and state in place and
    returns the step error e(t).

    ``eta`` overrides cfg.eta (the growth controller decays it over phases).
    """
    x = np.ascontiguousarray(pattern.inputs, dtype=float)
    _check_dims(net, state, x.size)
    wb, starts, unit_block, ftu, err_col, out_col = _kernel_args(net)
    z = np.empty(net.n_inputs)
    h = np.empty(net.n_units)
    p = np.empty(net.k)
    e, y, _, status = _kernels.rtrl_step(
        wb, starts, unit_block, ftu, x, float(pattern.target),
        net.mode.has_error, net.mode.has_output, err_col, out_col,
        state.prev_error, state.prev_output, state.dy, state.prev_delta,
        cfg.eta if eta is None else float(eta), cfg.momentum,
        _grad_code(cfg.gradient_mode), z, h, p)
    if status != _kernels.OK:
        raise NumericDivergenceError(
            "block product overflowed or went non-finite", step_index=0)
    net.unpack_from(wb)
    state.prev_error = float(e)
    state.prev_output = float(y)
    return float(e)


def _grad_code(mode: GradientMode) -> int:
    return _kernels.GRAD_EXACT if mode is GradientMode.EXACT else _kernels.GRAD_PAPER


def train_epoch(net: RidgePolyNet, state: RtrlState, patterns: list[Pattern],
                cfg: TrainerConfig, eta: float | None = None,
                epoch: int = 0) -> tuple[EpochStats, np.ndarray]:
    """Apply rtrl_step to every pattern in sequence order (the feedback
    recursion requires temporal order; never shuffle). Returns the epoch
    statistics and the per-step errors; net and state are updated in place.
    """
    xs, targets = pattern_arrays(patterns)
    _check_dims(net, state, xs.shape[1])
    eta_used = cfg.eta if eta is None else float(eta)
    wb, starts, unit_block, ftu, err_col, out_col = _kernel_args(net)
    step_errors = np.empty(len(patterns))
    sse, prev_e, prev_y, status, bad_step = _kernels.train_epoch(
        wb, starts, unit_block, ftu, xs, targets,
        net.mode.has_error, net.mode.has_output, err_col, out_col,
        state.prev_error, state.prev_output, state.dy, state.prev_delta,
        eta_used, cfg.momentum, _grad_code(cfg.gradient_mode), step_errors)
    net.unpack_from(wb)
    state.prev_error = float(prev_e)
    state.prev_output = float(prev_y)
    if status == _kernels.DIVERGED:
        raise NumericDivergenceError(
            f"block product overflowed or went non-finite at step {bad_step}",
            step_index=int(bad_step))
    if status == _kernels.DEAD_EPOCH:
        raise NumericDivergenceError(
            "output derivative underflowed to zero on every step of the epoch",
            step_index=int(bad_step))
    stats = EpochStats(epoch=epoch, sse=float(sse), block_count=net.k,
                       eta_used=eta_used)
    return stats, step_errors


def constructive_fit(patterns: list[Pattern], cfg: TrainerConfig,
                     mode: FeedbackMode) -> tuple[RidgePolyNet, GrowthHistory]:
    """Grow a network from a single order-1 block while training online.

    After each epoch, if the drop in epoch SSE relative to the previous epoch
    of the same growth phase falls below the threshold r, the next-order block
    is appended (existing blocks freeze unless cfg.freeze_grown is off), eta
    and r are decayed, and the sensitivity/momentum state restarts at zero for
    the new trainable weights; feedback values carry over. Training stops at
    max_epochs, or when the largest allowed block stalls below its own
    threshold. Returns the network snapshot with the lowest epoch SSE seen,
    plus the full growth history.
    """
    if not patterns:
        raise ValueError("pattern list is empty")
    xs0 = np.asarray(patterns[0].inputs, dtype=float)
    rng = np.random.default_rng(cfg.seed)
    net = new_network(mode, xs0.size, cfg.init_range, rng)
    state = reset_state(net)
    history = GrowthHistory()

    eta = cfg.eta
    r = cfg.r_threshold
    prev_sse: float | None = None  # None at the first epoch of each phase
    best_sse = math.inf
    best_net = copy.deepcopy(net)

    for epoch in range(1, cfg.max_epochs + 1):
        try:
            stats, _ = train_epoch(net, state, patterns, cfg, eta=eta, epoch=epoch)
        except NumericDivergenceError as exc:
            exc.history = history
            raise
        history.epochs.append(stats)
        if stats.sse < best_sse:
            best_sse = stats.sse
            best_net = copy.deepcopy(net)
        improvement = math.inf if prev_sse is None else prev_sse - stats.sse
        if improvement < r:
            if net.k >= cfg.max_blocks:
                break  # the largest block stalled below its own threshold
            add_block(net, cfg.init_range, rng, max_blocks=cfg.max_blocks)
            if not cfg.freeze_grown:
                net.frozen_count = 0
            eta *= cfg.eta_decay
            r *= cfg.r_decay
            state = RtrlState(
                dy=np.zeros((net.n_trainable_units, 1 + net.n_inputs)),
                prev_error=state.prev_error, prev_output=state.prev_output,
                prev_delta=np.zeros((net.n_trainable_units, 1 + net.n_inputs)))
            stats.block_added = True
            history.additions.append(
                BlockAddition(epoch=epoch, new_order=net.k, eta_after=eta, r_after=r))
            prev_sse = None
        else:
            prev_sse = stats.sse

    return best_net, history


@dataclass
class ModeCheck:
    """Per-weight relative errors of one gradient mode against the
    finite-difference reference."""

    analytic: np.ndarray
    rel_errors: np.ndarray
    max_rel_error: float
    mean_rel_error: float


@dataclass
class GradientCheckReport:
    numeric: np.ndarray
    paper: ModeCheck
    exact: ModeCheck


def _relative_errors(analytic: np.ndarray, numeric: np.ndarray) -> np.ndarray:
    denom = np.maximum(np.abs(analytic), np.abs(numeric))
    rel = np.zeros_like(analytic)
    mask = denom > 1e-12
    rel[mask] = np.abs(analytic - numeric)[mask] / denom[mask]
    return rel


def gradient_check(net: RidgePolyNet, patterns: list[Pattern],
                   cfg: TrainerConfig, epsilon: float = 1e-6) -> GradientCheckReport:
    """Compare both gradient modes against full-sequence central finite
    differences of the final-step output.

    Weights are held fixed (eta forced to 0). For each trainable weight the
    whole sequence is re-rolled from the reset state with the weight nudged
    by +/- epsilon and the final outputs differenced.
    """
    if epsilon <= 0:
        raise ValueError("epsilon must be > 0")
    xs, targets = pattern_arrays(patterns)
    if xs.shape[1] != net.m_external:
        raise ValueError(
            f"pattern input length {xs.shape[1]} != network external input count {net.m_external}")
    wb, starts, unit_block, ftu, err_col, out_col = _kernel_args(net)
    has_err, has_out = net.mode.has_error, net.mode.has_output
    n_tr = net.n_trainable_units
    ncols = 1 + net.n_inputs
    step_errors = np.empty(len(patterns))

    def sensitivities(grad_code: int) -> np.ndarray:
        dy = np.zeros((n_tr, ncols))
        prev_delta = np.zeros((n_tr, ncols))
        _, _, _, status, bad = _kernels.train_epoch(
            wb, starts, unit_block, ftu, xs, targets, has_err, has_out,
            err_col, out_col, 0.5, 0.5, dy, prev_delta, 0.0, 0.0, grad_code,
            step_errors)
        if status == _kernels.DIVERGED:
            raise NumericDivergenceError("divergence during gradient check rollout",
                                         step_index=int(bad))
        return dy

    def final_output(weights: np.ndarray) -> float:
        forecasts = np.empty(len(patterns))
        status, bad = _kernels.rollout(weights, starts, xs, targets,
                                       has_err, has_out, forecasts)
        if status != _kernels.OK:
            raise NumericDivergenceError("divergence during gradient check rollout",
                                         step_index=int(bad))
        return float(forecasts[-1])

    numeric = np.empty((n_tr, ncols))
    for r in range(n_tr):
        for col in range(ncols):
            bumped = wb.copy()
            bumped[ftu + r, col] += epsilon
            y_plus = final_output(bumped)
            bumped = wb.copy()
            bumped[ftu + r, col] -= epsilon
            y_minus = final_output(bumped)
            numeric[r, col] = (y_plus - y_minus) / (2.0 * epsilon)

    checks = {}
    for mode in (GradientMode.PAPER, GradientMode.EXACT):
        analytic = sensitivities(_grad_code(mode))
        rel = _relative_errors(analytic, numeric)
        checks[mode] = ModeCheck(analytic=analytic, rel_errors=rel,
                                 max_rel_error=float(rel.max()),
                                 mean_rel_error=float(rel.mean()))
    return GradientCheckReport(numeric=numeric,
                               paper=checks[GradientMode.PAPER],
                               exact=checks[GradientMode.EXACT])
