"""Local blockage factor h(t): trace I/O, synthetic event generators, and
the channel-power scaling calibration that sets a target test SNR.

Traces are relative linear-power sequences on a uniform grid; their absolute
level is immaterial because the scaling factor beta is calibrated afterwards.
Synthetic generators stand in for measured obstruction recordings: each event
ramps the level down, holds at a configured depth, and ramps back up.
"""

from dataclasses import dataclass

import numpy as np

DEFAULT_SAMPLE_PERIOD_S = 128e-6

# Per-kind synthesis defaults: (depth_db, transition_s, event_rate_hz, hold_s)
_KIND_DEFAULTS = {
    "walker": (20.0, 0.100, 0.5, 0.3),
    "plate": (35.0, 0.030, 0.5, 0.2),
    "hand": (15.0, 0.200, 0.3, 0.5),
}


class CalibrationError(ValueError):
    """Average SNR is zero; the scaling factor cannot reach any target."""


@dataclass(frozen=True, eq=False)
class BlockageTrace:
    samples: np.ndarray  # linear power scale, >= 0
    sample_period_s: float
    label: str = ""

    def __post_init__(self):
        s = np.asarray(self.samples, dtype=float)
        object.__setattr__(self, "samples", s)
        if s.ndim != 1 or s.size < 2:
            raise ValueError("trace needs at least two samples")
        if np.any(s < 0) or not np.all(np.isfinite(s)):
            raise ValueError("samples must be finite and nonnegative")
        if self.sample_period_s <= 0:
            raise ValueError("sample_period_s must be positive")

    @property
    def duration_s(self) -> float:
        """Covered duration: each sample represents one sample period."""
        return self.samples.size * self.sample_period_s

    def value_at(self, t) -> np.ndarray:
        """Linearly interpolated h(t); t must lie inside the trace span.

        The last sample holds through the final sample interval.
        """
        t = np.asarray(t, dtype=float)
        if np.any(t < 0) or np.any(t > self.duration_s):
            raise ValueError(
                f"t outside trace span [0, {self.duration_s:.6g}] s"
            )
        # Uniform grid: direct index arithmetic beats np.interp's search.
        pos = t / self.sample_period_s
        i0 = np.minimum(pos.astype(np.int64), self.samples.size - 2)
        frac = np.minimum(pos - i0, 1.0)
        return self.samples[i0] * (1.0 - frac) + self.samples[i0 + 1] * frac


@dataclass(frozen=True)
class BlockageEventSpec:
    """Synthetic obstruction events on a unit baseline.

    duration_s is the total trace duration; hold_s is how long one event
    stays at full depth between its two ramps.
    """

    event_kind: str = "walker"
    depth_db: float = 20.0
    event_rate_hz: float = 0.5
    transition_s: float = 0.1
    hold_s: float = 0.3
    duration_s: float = 10.0
    sample_period_s: float = DEFAULT_SAMPLE_PERIOD_S
    ramp: str = "raised_cosine"  # or "linear"
    seed: int = 0

    def __post_init__(self):
        if self.event_kind not in _KIND_DEFAULTS:
            raise ValueError(f"unknown event kind {self.event_kind!r}")
        if self.depth_db <= 0 or self.duration_s <= 0 or self.transition_s <= 0:
            raise ValueError("depth_db, duration_s and transition_s must be positive")
        if self.hold_s < 0 or self.event_rate_hz < 0:
            raise ValueError("hold_s and event_rate_hz must be nonnegative")
        if self.ramp not in ("raised_cosine", "linear"):
            raise ValueError(f"unknown ramp shape {self.ramp!r}")


def event_defaults(kind: str, **overrides) -> BlockageEventSpec:
    """Spec with the per-kind default depth/transition/rate/hold."""
    if kind not in _KIND_DEFAULTS:
        raise ValueError(f"unknown event kind {kind!r}")
    depth, transition, rate, hold = _KIND_DEFAULTS[kind]
    base = dict(
        event_kind=kind,
        depth_db=depth,
        transition_s=transition,
        event_rate_hz=rate,
        hold_s=hold,
    )
    base.update(overrides)
    return BlockageEventSpec(**base)


def synthesize_trace(spec: BlockageEventSpec) -> BlockageTrace:
    """Unit-level trace with Poisson-arriving blockage events.

    Each event attenuates by depth_db: ramp down over transition_s, hold for
    hold_s, ramp back.  Overlapping events combine by taking the deepest
    attenuation, so the trace never leaves [10^(-depth_db/10), 1].
    """
    n = round(spec.duration_s / spec.sample_period_s)
    if n < 2:
        raise ValueError("duration too short for the sample period")
    t = np.arange(n) * spec.sample_period_s
    att_db = np.zeros(n)

    rng = np.random.default_rng(spec.seed)
    event_len = 2 * spec.transition_s + spec.hold_s
    starts = []
    if spec.event_rate_hz > 0:
        pos = rng.exponential(1.0 / spec.event_rate_hz)
        while pos < spec.duration_s:
            starts.append(pos)
            pos += event_len + rng.exponential(1.0 / spec.event_rate_hz)

    for start in starts:
        u = t - start
        frac = np.zeros(n)
        down = (u >= 0) & (u < spec.transition_s)
        hold = (u >= spec.transition_s) & (u < spec.transition_s + spec.hold_s)
        up = (u >= spec.transition_s + spec.hold_s) & (u < event_len)
        frac[down] = u[down] / spec.transition_s
        frac[hold] = 1.0
        frac[up] = (event_len - u[up]) / spec.transition_s
        if spec.ramp == "raised_cosine":
            frac = 0.5 * (1.0 - np.cos(np.pi * frac))
        att_db = np.maximum(att_db, spec.depth_db * frac)

    samples = 10.0 ** (-att_db / 10.0)
    return BlockageTrace(samples=samples, sample_period_s=spec.sample_period_s,
                         label=spec.event_kind)


def load_trace(path) -> BlockageTrace:
    """Read a trace CSV: header 'sample_period_s,<value>', one sample per line."""
    with open(path, "r", encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    if not lines:
        raise ValueError(f"{path}: empty trace file")
    header = lines[0].split(",")
    if len(header) != 2 or header[0] != "sample_period_s":
        raise ValueError(f"{path}:1: expected header 'sample_period_s,<value>'")
    try:
        period = float(header[1])
    except ValueError as exc:
        raise ValueError(f"{path}:1: bad sample period {header[1]!r}") from exc
    if period <= 0:
        raise ValueError(f"{path}:1: sample period must be positive")
    samples = np.empty(len(lines) - 1)
    label = ""
    for i, line in enumerate(lines[1:], start=2):
        try:
            samples[i - 2] = float(line)
        except ValueError as exc:
            raise ValueError(f"{path}:{i}: bad sample {line!r}") from exc
        if samples[i - 2] < 0:
            raise ValueError(f"{path}:{i}: negative sample {line!r}")
    return BlockageTrace(samples=samples, sample_period_s=period, label=label)


def write_trace(trace: BlockageTrace, path) -> None:
    """Write the trace CSV; full-precision floats so load_trace round-trips exactly."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"sample_period_s,{trace.sample_period_s!r}\n")
        for v in trace.samples:
            fh.write(f"{float(v)!r}\n")


def calibrate_beta(
    state,
    target_linear: float,
    w_tx,
    w_rx,
    ptx_w: float,
    n0_w_per_hz: float,
    grid_step_s: float = 16e-3,
    n_freq_samples: int = 64,
    grid_offset_s: float = 0.0,
) -> float:
    """Channel-power scale that brings the time-averaged SNR to target_linear.

    The average is taken on the downsampled grid where tracking operates
    (16 ms by default; grid_offset_s shifts it onto the tracked direction's
    slots), and the SNR is linear in the scale factor, so the result is a
    single division.
    """
    from . import channel

    if target_linear <= 0:
        raise ValueError("target_linear must be positive")
    # Half-open grid [offset, duration): the slots where tracking measures.
    span = state.blockage.duration_s
    t = np.arange(grid_offset_s, span - 1e-12, grid_step_s)
    gammas = channel.true_wideband_snr(
        state, t, w_tx, w_rx, ptx_w, n0_w_per_hz, n_freq_samples=n_freq_samples
    )
    avg = float(np.mean(gammas))
    if avg == 0.0:
        raise CalibrationError(
            "average SNR is zero (fully blocked trace); cannot calibrate"
        )
    return state.beta * target_linear / avg
