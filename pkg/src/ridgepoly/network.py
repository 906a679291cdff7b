"""Ridge polynomial network data model and forward pass.

A network is an ordered list of Pi-Sigma blocks of orders 1..k. Block i
multiplies the net sums of its i sigma units; the block products are summed
and squashed through a sigmoid. Depending on the feedback mode, the input
vector carries, after the M external inputs, the previous step's forecast
error and/or the previous forecast itself.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from . import _kernels
from .errors import GrowthExhaustedError

# default growth bound; the trainer config can override it
MAX_BLOCKS = 5


class FeedbackMode(Enum):
    """Which recurrent inputs are appended to the external input vector.

    The enum value is the variant's conventional short name: plain feedforward
    network (rpnn), previous-output feedback (drpnn), previous-error feedback
    (rpnn-ef), or both (rpnn-eof).
    """

    NONE = "rpnn"
    OUTPUT = "drpnn"
    ERROR = "rpnn-ef"
    ERROR_OUTPUT = "rpnn-eof"

    @property
    def has_error(self) -> bool:
        return self in (FeedbackMode.ERROR, FeedbackMode.ERROR_OUTPUT)

    @property
    def has_output(self) -> bool:
        return self in (FeedbackMode.OUTPUT, FeedbackMode.ERROR_OUTPUT)

    @property
    def n_feedback(self) -> int:
        return int(self.has_error) + int(self.has_output)

    @classmethod
    def from_name(cls, name: str) -> "FeedbackMode":
        try:
            return cls(name.strip().lower())
        except ValueError:
            valid = ", ".join(m.value for m in cls)
            raise ValueError(f"unknown feedback mode {name!r}; expected one of {valid}") from None


def _feedback_columns(mode: FeedbackMode, m_external: int) -> tuple[int, int]:
    """Column indices of the error / output feedback weights in the packed
    (bias-first) weight matrix; -1 when the feedback is absent."""
    err_col = 1 + m_external if mode.has_error else -1
    out_col = 1 + m_external + int(mode.has_error) if mode.has_output else -1
    return err_col, out_col


@dataclass
class SigmaUnit:
    """One linear summing unit: net sum = bias + weights . z."""

    weights: np.ndarray
    bias: float

    def __post_init__(self):
        self.weights = np.asarray(self.weights, dtype=float)
        if self.weights.ndim != 1:
            raise ValueError("sigma unit weights must be a 1-D vector")
        self.bias = float(self.bias)


@dataclass
class PiSigmaBlock:
    """A product block of exactly ``order`` sigma units."""

    order: int
    units: list[SigmaUnit]

    def __post_init__(self):
        if self.order < 1:
            raise ValueError("block order must be >= 1")
        if len(self.units) != self.order:
            raise ValueError(
                f"block of order {self.order} must hold {self.order} units, got {len(self.units)}")


@dataclass
class RidgePolyNet:
    """Feedback mode, external input count M and the ordered block list.

    ``frozen_count`` is the number of leading blocks excluded from training;
    the growth controller freezes every existing block when a new one is
    appended.
    """

    mode: FeedbackMode
    m_external: int
    blocks: list[PiSigmaBlock]
    frozen_count: int = 0

    def __post_init__(self):
        if self.m_external < 1:
            raise ValueError("m_external must be >= 1")
        if not self.blocks:
            raise ValueError("a network needs at least one block")
        for i, block in enumerate(self.blocks):
            if block.order != i + 1:
                raise ValueError(
                    f"block orders must be exactly 1..k; block {i} has order {block.order}")
            for unit in block.units:
                if unit.weights.size != self.n_inputs:
                    raise ValueError(
                        f"unit weight length {unit.weights.size} != input dimension {self.n_inputs}")
        if not 0 <= self.frozen_count < self.k:
            raise ValueError("frozen_count must satisfy 0 <= frozen_count < block count")

    @property
    def k(self) -> int:
        return len(self.blocks)

    @property
    def n_inputs(self) -> int:
        return self.m_external + self.mode.n_feedback

    @property
    def n_units(self) -> int:
        return self.k * (self.k + 1) // 2

    @property
    def n_trainable_units(self) -> int:
        return sum(b.order for b in self.blocks[self.frozen_count:])

    @property
    def n_trainable_weights(self) -> int:
        """Trainable parameter count, biases included."""
        return self.n_trainable_units * (1 + self.n_inputs)

    def pack(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Flatten into (wb, starts, unit_block) for the compiled kernels."""
        wb = np.empty((self.n_units, 1 + self.n_inputs))
        starts = np.zeros(self.k + 1, dtype=np.int64)
        unit_block = np.empty(self.n_units, dtype=np.int64)
        row = 0
        for i, block in enumerate(self.blocks):
            starts[i] = row
            for unit in block.units:
                wb[row, 0] = unit.bias
                wb[row, 1:] = unit.weights
                unit_block[row] = i
                row += 1
        starts[self.k] = row
        return wb, starts, unit_block

    def unpack_from(self, wb: np.ndarray) -> None:
        """Write a packed weight matrix back into the block structure."""
        row = 0
        for block in self.blocks:
            for unit in block.units:
                unit.bias = float(wb[row, 0])
                unit.weights[:] = wb[row, 1:]
                row += 1


@dataclass
class ForwardTrace:
    """All intermediates of one forward evaluation, kept for the trainer:
    the assembled input z, per-block unit net sums h, per-block products p,
    and the output y."""

    z: np.ndarray
    h: list[np.ndarray]
    p: np.ndarray
    y: float


def sigmoid(x: float) -> float:
    """Logistic squashing 1 / (1 + exp(-x)); saturates at extreme inputs."""
    return float(_kernels.sigmoid(float(x)))


def assemble_inputs(x, prev_error: float, prev_output: float,
                    mode: FeedbackMode) -> np.ndarray:
    """Build the network input vector: external inputs first, then the error
    feedback (when the mode carries one), then the output feedback. A single
    feedback always sits directly after the external inputs."""
    x = np.ascontiguousarray(x, dtype=float)
    if x.ndim != 1:
        raise ValueError("external inputs must be a 1-D vector")
    z = np.empty(x.size + mode.n_feedback)
    _kernels.assemble(x, float(prev_error), float(prev_output),
                      mode.has_error, mode.has_output, z)
    return z


def forward(net: RidgePolyNet, z) -> ForwardTrace:
    """Evaluate the network on an assembled input vector."""
    z = np.ascontiguousarray(z, dtype=float)
    if z.shape != (net.n_inputs,):
        raise ValueError(
            f"input vector has length {z.size}, network expects {net.n_inputs}")
    wb, starts, _ = net.pack()
    h = np.empty(net.n_units)
    p = np.empty(net.k)
    y = _kernels.forward(wb, starts, z, h, p)
    h_blocks = [h[starts[i]:starts[i + 1]].copy() for i in range(net.k)]
    return ForwardTrace(z=z.copy(), h=h_blocks, p=p, y=float(y))


def _as_rng(rng) -> np.random.Generator:
    if isinstance(rng, np.random.Generator):
        return rng
    return np.random.default_rng(rng)


def _draw_block(order: int, n_inputs: int, init_range, rng) -> PiSigmaBlock:
    low, high = float(init_range[0]), float(init_range[1])
    if not low < high:
        raise ValueError("init_range must be a (low, high) interval with low < high")
    mat = rng.uniform(low, high, size=(order, 1 + n_inputs))
    units = [SigmaUnit(weights=mat[j, 1:].copy(), bias=float(mat[j, 0])) for j in range(order)]
    return PiSigmaBlock(order=order, units=units)


def new_network(mode: FeedbackMode, m_external: int,
                init_range=(-0.5, 0.5), rng=0) -> RidgePolyNet:
    """Create the smallest network (a single order-1 block) with weights drawn
    uniformly from init_range."""
    rng = _as_rng(rng)
    n_in = m_external + mode.n_feedback
    return RidgePolyNet(mode=mode, m_external=m_external,
                        blocks=[_draw_block(1, n_in, init_range, rng)])


def add_block(net: RidgePolyNet, init_range=(-0.5, 0.5), rng=0,
              max_blocks: int = MAX_BLOCKS) -> RidgePolyNet:
    """Append the next-order block with fresh uniform weights and freeze all
    existing blocks. Existing weights are untouched. Raises
    GrowthExhaustedError once max_blocks is reached."""
    if net.k >= max_blocks:
        raise GrowthExhaustedError(
            f"network already has {net.k} blocks (maximum {max_blocks})")
    rng = _as_rng(rng)
    new_frozen = net.k
    net.blocks.append(_draw_block(net.k + 1, net.n_inputs, init_range, rng))
    net.frozen_count = new_frozen
    return net


# --- flat text serialization ------------------------------------------------

MODEL_FORMAT = "ridgepoly-model-v1"


def dumps_model(net: RidgePolyNet) -> str:
    lines = [f"{MODEL_FORMAT} mode={net.mode.value} m={net.m_external} "
             f"blocks={net.k} frozen={net.frozen_count}"]
    for i, block in enumerate(net.blocks):
        for j, unit in enumerate(block.units):
            ws = " ".join(repr(float(w)) for w in unit.weights)
            lines.append(f"{i} {j} {repr(unit.bias)} {ws}")
    return "\n".join(lines) + "\n"


def loads_model(text: str) -> RidgePolyNet:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise ValueError("empty model file")
    header = lines[0].split()
    if not header or header[0] != MODEL_FORMAT:
        raise ValueError(f"unrecognized model format header: {lines[0]!r}")
    fields = dict(part.split("=", 1) for part in header[1:])
    try:
        mode = FeedbackMode.from_name(fields["mode"])
        m = int(fields["m"])
        k = int(fields["blocks"])
        frozen = int(fields["frozen"])
    except KeyError as exc:
        raise ValueError(f"model header missing field {exc}") from None
    n_in = m + mode.n_feedback
    blocks = [PiSigmaBlock(order=i + 1, units=[SigmaUnit(np.zeros(n_in), 0.0)
                                               for _ in range(i + 1)])
              for i in range(k)]
    seen = set()
    for ln in lines[1:]:
        parts = ln.split()
        if len(parts) != 3 + n_in:
            raise ValueError(f"malformed unit line (expected {3 + n_in} fields): {ln!r}")
        bi, ui = int(parts[0]), int(parts[1])
        if not (0 <= bi < k and 0 <= ui <= bi):
            raise ValueError(f"unit index ({bi}, {ui}) out of range for {k} blocks")
        unit = blocks[bi].units[ui]
        unit.bias = float(parts[2])
        unit.weights[:] = [float(v) for v in parts[3:]]
        seen.add((bi, ui))
    expected = {(i, j) for i in range(k) for j in range(i + 1)}
    if seen != expected:
        raise ValueError("model file does not list every sigma unit exactly once")
    return RidgePolyNet(mode=mode, m_external=m, blocks=blocks, frozen_count=frozen)


def save_model(net: RidgePolyNet, path) -> None:
    with open(path, "w") as fh:
        fh.write(dumps_model(net))


def load_model(path) -> RidgePolyNet:
    with open(path) as fh:
        return loads_model(fh.read())
