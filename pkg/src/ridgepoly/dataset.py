"""Chaotic benchmark series generation, scaling and lag embedding.

The generator integrates the scalar delay differential equation

    dx/dt = beta * x(t) + alpha * x(t - tau) / (1 + x(t - tau)^10)

with classic fourth-order Runge-Kutta over a fixed grid, holding the delayed
value from a history buffer (constant pre-history). One point is emitted every
``sample_every`` integrator steps, so the defaults (dt=0.1, sample_every=10)
yield one point per unit time.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateRangeError, NumericDivergenceError


@dataclass(frozen=True)
class MgParams:
    """Generator settings. tau/dt must be an integer so delayed grid values
    line up with the history buffer."""

    alpha: float = 0.2
    beta: float = -0.1
    tau: float = 17.0
    x0: float = 1.2
    dt: float = 0.1
    sample_every: int = 10
    n_points: int = 1000
    transient_skip: int = 0

    def __post_init__(self):
        if self.dt <= 0:
            raise ValueError("dt must be > 0")
        if self.tau <= 0:
            raise ValueError("tau must be > 0")
        ratio = self.tau / self.dt
        if abs(ratio - round(ratio)) > 1e-9:
            raise ValueError(f"tau/dt must be an integer, got {ratio}")
        if self.n_points < 1:
            raise ValueError("n_points must be >= 1")
        if self.sample_every < 1:
            raise ValueError("sample_every must be >= 1")
        if self.transient_skip < 0:
            raise ValueError("transient_skip must be >= 0")

    @property
    def delay_steps(self) -> int:
        return int(round(self.tau / self.dt))


@dataclass
class Series:
    """A sampled scalar series; params records provenance when generated here
    (None for externally loaded data)."""

    values: np.ndarray
    params: MgParams | None = None

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if not np.all(np.isfinite(self.values)):
            raise ValueError("series values must all be finite")


def generate_mackey_glass(p: MgParams) -> Series:
    """Integrate the delay equation and return exactly n_points samples.

    The first emitted point is the state at t = transient_skip * sample_every
    * dt (the initial value itself under the defaults). Delayed values at
    half-steps are linearly interpolated between adjacent grid values.
    """
    d = p.delay_steps
    n_steps = (p.transient_skip + p.n_points - 1) * p.sample_every
    # xs[d + n] is the state at integrator step n; indices below d hold the
    # constant pre-history
    xs = np.empty(d + n_steps + 1)
    xs[:d + 1] = p.x0
    alpha, beta, h = p.alpha, p.beta, p.dt

    def f(x: float, x_delayed: float) -> float:
        return beta * x + alpha * x_delayed / (1.0 + x_delayed ** 10)

    for n in range(n_steps):
        x = xs[d + n]
        xd0 = xs[n]                      # x(t_n - tau)
        xd1 = xs[n + 1]                  # x(t_n + dt - tau)
        xdm = 0.5 * (xd0 + xd1)          # linear midpoint
        k1 = f(x, xd0)
        k2 = f(x + 0.5 * h * k1, xdm)
        k3 = f(x + 0.5 * h * k2, xdm)
        k4 = f(x + h * k3, xd1)
        x_next = x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if not math.isfinite(x_next):
            raise NumericDivergenceError(
                f"generator state became non-finite at integrator step {n + 1}",
                step_index=n + 1)
        xs[d + n + 1] = x_next

    first = d + p.transient_skip * p.sample_every
    values = xs[first::p.sample_every][:p.n_points].copy()
    return Series(values=values, params=p)


@dataclass(frozen=True)
class NormParams:
    """Affine map sending the observed range [min1, max1] onto [min2, max2]."""

    min1: float
    max1: float
    min2: float = 0.2
    max2: float = 0.8

    def __post_init__(self):
        if not self.max1 > self.min1:
            raise DegenerateRangeError(
                f"observed range is degenerate: min {self.min1} >= max {self.max1}")
        if not self.max2 > self.min2:
            raise ValueError("target interval must have max2 > min2")

    @classmethod
    def from_values(cls, values, min2: float = 0.2, max2: float = 0.8) -> "NormParams":
        """Extrema taken over all observations of the series."""
        values = _values_of(values)
        return cls(min1=float(values.min()), max1=float(values.max()),
                   min2=min2, max2=max2)

    @property
    def scale(self) -> float:
        return (self.max2 - self.min2) / (self.max1 - self.min1)


def _values_of(obj) -> np.ndarray:
    if isinstance(obj, Series):
        return obj.values
    return np.asarray(obj, dtype=float)


def normalize(values, np_: NormParams) -> np.ndarray:
    x = _values_of(values)
    return (np_.max2 - np_.min2) * ((x - np_.min1) / (np_.max1 - np_.min1)) + np_.min2


def denormalize(values, np_: NormParams) -> np.ndarray:
    v = _values_of(values)
    return (v - np_.min2) * ((np_.max1 - np_.min1) / (np_.max2 - np_.min2)) + np_.min1


@dataclass
class Pattern:
    """One supervised example: the lagged inputs at anchor t and the value
    ``horizon`` steps ahead as target."""

    inputs: np.ndarray
    target: float
    t_index: int

    def __post_init__(self):
        self.inputs = np.ascontiguousarray(self.inputs, dtype=float)
        self.target = float(self.target)


def build_patterns(values, lags=(0, 6, 12, 18), horizon: int = 6) -> list[Pattern]:
    """One pattern per anchor t from max(lags) to len-1-horizon, in ascending
    order; inputs are [x(t - lag) for lag in lags]."""
    x = _values_of(values)
    lags = tuple(int(l) for l in lags)
    if not lags or any(l < 0 for l in lags):
        raise ValueError("lags must be a non-empty list of non-negative integers")
    if horizon < 1:
        raise ValueError("horizon must be >= 1")
    max_lag = max(lags)
    n = x.size
    if n <= max_lag + horizon:
        raise ValueError(
            f"series of length {n} is too short for max lag {max_lag} and horizon {horizon}")
    patterns = []
    for t in range(max_lag, n - horizon):
        inputs = np.array([x[t - l] for l in lags])
        patterns.append(Pattern(inputs=inputs, target=x[t + horizon], t_index=t))
    return patterns


def split_patterns(patterns: list[Pattern], train_points: int = 500,
                   split_mode: str = "points") -> tuple[list[Pattern], list[Pattern]]:
    """Split into (train, test). Mode "points": training patterns are those
    anchored inside the first ``train_points`` series points; mode "patterns":
    the first ``train_points`` patterns train."""
    if split_mode == "points":
        train = [p for p in patterns if p.t_index < train_points]
        test = [p for p in patterns if p.t_index >= train_points]
    elif split_mode == "patterns":
        train = patterns[:train_points]
        test = patterns[train_points:]
    else:
        raise ValueError(f"unknown split mode {split_mode!r} (use 'points' or 'patterns')")
    if not train or not test:
        raise ValueError("split leaves an empty train or test set")
    return train, test


def pattern_arrays(patterns: list[Pattern]) -> tuple[np.ndarray, np.ndarray]:
    """Stack a pattern list into (inputs, targets) arrays for the kernels."""
    if not patterns:
        raise ValueError("pattern list is empty")
    m = patterns[0].inputs.size
    if any(p.inputs.size != m for p in patterns):
        raise ValueError("patterns have inconsistent input lengths")
    xs = np.stack([p.inputs for p in patterns]).astype(float)
    targets = np.array([p.target for p in patterns], dtype=float)
    return xs, targets


# --- CSV interchange ----------------------------------------------------------

def save_series_csv(series: Series, path) -> None:
    with open(path, "w") as fh:
        fh.write("t,x\n")
        for i, v in enumerate(series.values):
            fh.write(f"{i},{repr(float(v))}\n")


def load_series_csv(path) -> Series:
    values = []
    with open(path) as fh:
        header = fh.readline().strip()
        if header != "t,x":
            raise ValueError(f"expected series header 't,x', got {header!r}")
        for line_no, line in enumerate(fh, start=2):
            line = line.strip()
            if not line:
                continue
            parts = line.split(",")
            if len(parts) != 2:
                raise ValueError(f"malformed series row at line {line_no}: {line!r}")
            values.append(float(parts[1]))
    if not values:
        raise ValueError("series file holds no data rows")
    return Series(values=np.array(values), params=None)


def save_patterns_csv(patterns: list[Pattern], lags, path) -> None:
    lags = tuple(int(l) for l in lags)
    if patterns and patterns[0].inputs.size != len(lags):
        raise ValueError("lag list length does not match pattern input length")
    with open(path, "w") as fh:
        fh.write("t," + ",".join(f"x{l}" for l in lags) + ",target\n")
        for p in patterns:
            ins = ",".join(repr(float(v)) for v in p.inputs)
            fh.write(f"{p.t_index},{ins},{repr(p.target)}\n")
