"""Linear filtering of raw SNR traces.

Three schemes: identity ("none"), first-order low-pass
y_i = (1 - alpha) * y_{i-1} + alpha * x_i, and the moving average of the
last M inputs.  Filtering happens in the linear SNR domain; a dB-domain mode
is deliberately absent.
"""

from collections import deque
from dataclasses import dataclass, field
import math

import numpy as np

from .syncsig import SnrTrace

FILTER_KINDS = ("none", "first_order", "moving_average")


@dataclass(frozen=True)
class FilterSpec:
    kind: str = "none"
    alpha: float = 0.3        # first_order only, in (0, 1]
    window_m: int = 4         # moving_average only, >= 1
    init: str = "first"       # first_order start: "first" sample or "zero"

    def __post_init__(self):
        if self.kind not in FILTER_KINDS:
            raise ValueError(f"kind must be one of {FILTER_KINDS}")
        if self.kind == "first_order" and not (0.0 < self.alpha <= 1.0):
            raise ValueError("alpha must lie in (0, 1]")
        if self.kind == "moving_average" and self.window_m < 1:
            raise ValueError("window_m must be >= 1")
        if self.init not in ("first", "zero"):
            raise ValueError("init must be 'first' or 'zero'")

    @property
    def filter_id(self) -> str:
        if self.kind == "first_order":
            return f"fo_a{self.alpha:g}"
        if self.kind == "moving_average":
            return f"ma_m{self.window_m}"
        return "none"


@dataclass
class FilterState:
    """Mutable per-run memory: previous output or ring buffer of inputs."""

    prev: float | None = None
    buf: deque = field(default_factory=deque)
    warmup_count: int = 0


def new_state(spec: FilterSpec) -> FilterState:
    if spec.kind == "moving_average":
        return FilterState(buf=deque(maxlen=spec.window_m))
    return FilterState()


def filter_step(state: FilterState, spec: FilterSpec, x: float):
    """Advance the filter by one sample; returns (state, output)."""
    if not math.isfinite(x):
        raise ValueError(f"non-finite filter input {x!r}")
    state.warmup_count += 1
    if spec.kind == "none":
        return state, x
    if spec.kind == "first_order":
        if state.prev is None:
            y = x if spec.init == "first" else spec.alpha * x
        else:
            y = (1.0 - spec.alpha) * state.prev + spec.alpha * x
        state.prev = y
        return state, y
    # moving_average: mean over the available window during warm-up
    state.buf.append(x)
    return state, float(sum(state.buf) / len(state.buf))


def filter_trace(raw: SnrTrace, spec: FilterSpec) -> SnrTrace:
    """Apply the filter sequentially in linear scale; same time grid."""
    if raw.kind != "raw":
        raise ValueError(f"filter_trace expects a raw trace, got kind={raw.kind!r}")
    state = new_state(spec)
    out = np.empty(raw.values.size)
    for i, x in enumerate(raw.values):
        state, out[i] = filter_step(state, spec, float(x))
    return SnrTrace(t=raw.t, values=out, kind="filtered")
