"""Periodic synchronization-signal measurements and the raw SNR estimate.

A base station broadcasts a short synchronization burst every t_per_s
seconds; each burst splits its energy across n_sig narrowband sub-signals at
frequencies f_k drawn across the band for diversity.  The receiver scans
n_dir beam directions round-robin, so any fixed direction is measured once
every n_dir * t_per_s seconds.

Per sub-signal the matched-filter output is

    z_ik = sqrt(E_s) * w_rx^H H(t_i, f_k) w_tx + v_ik,   v_ik ~ CN(0, N0)

with per-sub-signal energy E_s = P_tx * t_sig_s / n_sig.  Summing the
noise-corrected powers gives the raw wideband-SNR estimate

    gamma_hat_i = sum_k (|z_ik|^2 - N0) / (N0 * t_sig_s * W_tot)

which is unbiased when the f_k are uniform over the band.  gamma_hat can be
negative in deep fades; negative values are carried through unclamped (the
dB floor is applied only at display/metric time, see mmwtrack.evaluate).
"""

from dataclasses import dataclass
import math

import numpy as np

from .arrays import BeamCodebook, SteeringVector
from .channel import ChannelState, _response_batch, true_wideband_snr

SNR_KINDS = ("true_snr", "raw", "filtered")
_GRID_TOL = 1e-12


@dataclass(frozen=True)
class SyncConfig:
    t_per_s: float = 1e-3      # burst period
    t_sig_s: float = 10e-6     # burst duration (1% overhead at defaults)
    n_sig: int = 4             # sub-signals per burst
    w_sig_hz: float = 1e6      # sub-signal bandwidth
    n_dir: int = 16            # scanned beam directions
    freq_placement: str = "random"  # "random" (unbiased) or "comb" (regular)
    noise_enabled: bool = True  # diagnostic switch: False zeroes the v_ik draw

    def __post_init__(self):
        if self.t_per_s <= 0 or self.t_sig_s <= 0 or self.w_sig_hz <= 0:
            raise ValueError("timing and bandwidth fields must be positive")
        if self.t_sig_s >= self.t_per_s:
            raise ValueError("t_sig_s must be smaller than t_per_s")
        if self.n_sig < 1 or self.n_dir < 1:
            raise ValueError("n_sig and n_dir must be >= 1")
        if self.freq_placement not in ("random", "comb"):
            raise ValueError(f"unknown freq_placement {self.freq_placement!r}")

    @property
    def measurement_period_s(self) -> float:
        """Revisit period of one fixed direction."""
        return self.n_dir * self.t_per_s


@dataclass(frozen=True, eq=False)
class RawMeasurement:
    t_i: float
    direction_index: int
    z: np.ndarray          # matched-filter outputs, length n_sig
    gamma_hat: float       # may be negative


@dataclass(frozen=True, eq=False)
class SnrTrace:
    """Uniformly sampled SNR sequence (true, raw, or filtered role)."""

    t: np.ndarray
    values: np.ndarray     # linear scale
    kind: str

    def __post_init__(self):
        t = np.asarray(self.t, dtype=float)
        v = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "values", v)
        if self.kind not in SNR_KINDS:
            raise ValueError(f"kind must be one of {SNR_KINDS}")
        if t.size != v.size or t.size < 1:
            raise ValueError("t and values must be nonempty and equal length")
        if t.size > 1:
            dt = np.diff(t)
            if np.any(dt <= 0) or np.max(np.abs(dt - dt[0])) > _GRID_TOL:
                raise ValueError("t must be strictly increasing and uniform")

    @property
    def step_s(self) -> float:
        return float(self.t[1] - self.t[0]) if self.t.size > 1 else 0.0


def sub_signal_energy(ptx_w: float, cfg: SyncConfig) -> float:
    """Transmitted energy per sub-signal: P_tx * t_sig_s / n_sig."""
    return ptx_w * cfg.t_sig_s / cfg.n_sig


def _draw_frequencies(scenario, cfg: SyncConfig, rng) -> np.ndarray:
    lo = scenario.carrier_hz - scenario.bandwidth_hz / 2
    if cfg.freq_placement == "random":
        return rng.uniform(lo, lo + scenario.bandwidth_hz, cfg.n_sig)
    # Regular comb: deterministic midpoints.  Biased on frequency-selective
    # channels; kept for experiments with fixed sub-signal placement.
    return lo + (np.arange(cfg.n_sig) + 0.5) * (scenario.bandwidth_hz / cfg.n_sig)


def measure_once(
    state: ChannelState,
    t_i: float,
    w_tx: SteeringVector,
    w_rx: SteeringVector,
    cfg: SyncConfig,
    ptx_w: float,
    n0_w_per_hz: float,
    rng: np.random.Generator,
    direction_index: int = 0,
) -> RawMeasurement:
    """One synchronization-signal measurement at time t_i.

    Draws the sub-signal frequencies (then the complex noise) from rng, so a
    seeded generator reproduces the measurement sequence exactly.
    """
    freqs = _draw_frequencies(state.scenario, cfg, rng)
    resp = _response_batch(state, np.full(cfg.n_sig, t_i), freqs, w_tx, w_rx)
    es = sub_signal_energy(ptx_w, cfg)
    z = math.sqrt(es) * resp
    # The N0 subtraction removes the mean noise power; with the noise model
    # switched off it would turn into a systematic bias, so both go together.
    floor = 0.0
    if cfg.noise_enabled:
        noise = rng.standard_normal(cfg.n_sig) + 1j * rng.standard_normal(cfg.n_sig)
        z = z + math.sqrt(n0_w_per_hz / 2.0) * noise
        floor = n0_w_per_hz
    gamma_hat = float(
        (np.abs(z) ** 2 - floor).sum()
        / (n0_w_per_hz * cfg.t_sig_s * state.scenario.bandwidth_hz)
    )
    return RawMeasurement(
        t_i=float(t_i), direction_index=direction_index, z=z, gamma_hat=gamma_hat
    )


def scan_schedule(cfg: SyncConfig, horizon_s: float):
    """(t_i, direction_index) pairs: one burst per period, directions round-robin."""
    if horizon_s <= 0:
        raise ValueError("horizon_s must be positive")
    # Half-open horizon [0, horizon): a 10 s horizon at 1 ms holds 10000 slots.
    n = int(math.ceil(horizon_s / cfg.t_per_s - 1e-9))
    return [(i * cfg.t_per_s, i % cfg.n_dir) for i in range(n)]


def track_direction(
    state: ChannelState,
    cfg: SyncConfig,
    direction_index: int,
    codebook: BeamCodebook,
    w_tx: SteeringVector,
    ptx_w: float,
    n0_w_per_hz: float,
    horizon_s: float,
    seed: int,
    n_freq_samples: int = 64,
):
    """Track one pointing direction over a horizon.

    Runs measure_once at every slot where the scan visits direction_index and
    evaluates the true wideband SNR at the same instants.  Returns
    (raw_trace, true_trace) on the identical time grid.
    """
    if direction_index >= cfg.n_dir or direction_index < 0:
        raise ValueError("direction_index must lie in [0, n_dir)")
    if direction_index >= codebook.n_dir:
        raise ValueError("codebook does not cover direction_index")
    w_rx = codebook.beams[direction_index]
    slots = [t for (t, d) in scan_schedule(cfg, horizon_s) if d == direction_index]
    t_arr = np.array(slots)
    rng = np.random.default_rng(seed)
    raw = np.empty(t_arr.size)
    for i, ti in enumerate(t_arr):
        raw[i] = measure_once(
            state, ti, w_tx, w_rx, cfg, ptx_w, n0_w_per_hz, rng,
            direction_index=direction_index,
        ).gamma_hat
    true_vals = true_wideband_snr(
        state, t_arr, w_tx, w_rx, ptx_w, n0_w_per_hz, n_freq_samples=n_freq_samples
    )
    return (
        SnrTrace(t=t_arr, values=raw, kind="raw"),
        SnrTrace(t=t_arr, values=np.asarray(true_vals), kind="true_snr"),
    )


def write_snr_csv(trace: SnrTrace, path) -> None:
    """SNR trace CSV: header 't_s,value_linear,kind', one sample per row."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("t_s,value_linear,kind\n")
        for t, v in zip(trace.t, trace.values):
            fh.write(f"{float(t)!r},{float(v)!r},{trace.kind}\n")


def read_snr_csv(path) -> SnrTrace:
    with open(path, "r", encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    if not lines or lines[0] != "t_s,value_linear,kind":
        raise ValueError(f"{path}: expected header 't_s,value_linear,kind'")
    t, v, kinds = [], [], set()
    for i, line in enumerate(lines[1:], start=2):
        parts = line.split(",")
        if len(parts) != 3:
            raise ValueError(f"{path}:{i}: expected 3 columns")
        t.append(float(parts[0]))
        v.append(float(parts[1]))
        kinds.add(parts[2])
    if len(kinds) != 1:
        raise ValueError(f"{path}: mixed kinds {sorted(kinds)}")
    return SnrTrace(t=np.array(t), values=np.array(v), kind=kinds.pop())
