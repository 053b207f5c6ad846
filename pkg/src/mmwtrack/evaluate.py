"""Estimation-error metrics and target-SNR sweeps.

The error of an estimate against the true SNR trace is the pointwise
absolute difference, in dB by default (linear kept for diagnostics).
Negative raw estimates are legal in deep fades, so dB conversion floors
linear values at DB_FLOOR first; that floor is the single clamp in the
pipeline.

A sweep cell fixes a target SNR, calibrates the channel-power scale to the
synchronization-signal level (target / n_tx), tracks the best-aligned beam
over the horizon, filters the raw trace with each configured scheme, and
averages the dB error over time; cells are then averaged across seeds.
"""

from dataclasses import dataclass, replace
import math

import numpy as np

from .arrays import SteeringVector, steering_vector, uniform_codebook
from .blockage import CalibrationError, calibrate_beta
from .channel import ChannelState, assign_doppler, best_direction, generate_pathset
from .config import ExperimentConfig
from .filters import filter_trace
from .syncsig import SnrTrace, track_direction

DB_FLOOR = 1e-12


def to_db(values, floor: float = DB_FLOOR):
    """10*log10 with the documented linear floor (handles negatives)."""
    v = np.maximum(np.asarray(values, dtype=float), floor)
    return 10.0 * np.log10(v)


@dataclass(frozen=True, eq=False)
class ErrorSeries:
    t: np.ndarray
    err: np.ndarray
    domain: str  # "linear" or "db"

    def __post_init__(self):
        if self.domain not in ("linear", "db"):
            raise ValueError("domain must be 'linear' or 'db'")
        if self.t.size != self.err.size:
            raise ValueError("t and err must have equal length")
        if np.any(self.err < 0):
            raise ValueError("errors are absolute values, must be >= 0")


@dataclass(frozen=True, eq=False)
class SweepResult:
    target_snr_db: np.ndarray
    filter_ids: tuple
    mean_err_db: np.ndarray  # (targets, filters); NaN marks missing cells
    n_seeds: int

    def __post_init__(self):
        if self.mean_err_db.shape != (self.target_snr_db.size, len(self.filter_ids)):
            raise ValueError("mean_err_db shape does not match grid")

    def column(self, filter_id: str) -> np.ndarray:
        return self.mean_err_db[:, self.filter_ids.index(filter_id)]


def error_series(true_trace: SnrTrace, est_trace: SnrTrace, domain: str = "db") -> ErrorSeries:
    """Pointwise |estimate - true| on a shared time grid."""
    if true_trace.kind != "true_snr" or est_trace.kind not in ("raw", "filtered"):
        raise ValueError("expected a true_snr trace and a raw/filtered estimate")
    if true_trace.t.size != est_trace.t.size or np.max(
        np.abs(true_trace.t - est_trace.t)
    ) > 1e-12:
        raise ValueError("time grids differ")
    if domain == "db":
        err = np.abs(to_db(est_trace.values) - to_db(true_trace.values))
    elif domain == "linear":
        err = np.abs(est_trace.values - true_trace.values)
    else:
        raise ValueError("domain must be 'linear' or 'db'")
    return ErrorSeries(t=true_trace.t, err=err, domain=domain)


def error_cdf(series: ErrorSeries, n_points: int) -> np.ndarray:
    """Empirical CDF sampled at n_points quantile knots; (value, prob) rows."""
    if series.err.size == 0:
        raise ValueError("empty error series")
    if n_points < 1:
        raise ValueError("n_points must be >= 1")
    data = np.sort(series.err)
    n = data.size
    out = np.empty((n_points, 2))
    for j in range(n_points):
        p = (j + 1) / n_points
        idx = min(n - 1, math.ceil(p * n) - 1)
        v = data[idx]
        out[j, 0] = v
        out[j, 1] = np.searchsorted(data, v, side="right") / n
    return out


@dataclass(frozen=True, eq=False)
class Realization:
    """Everything one run seed pins: channel, blockage, beams, noise stream."""

    state: ChannelState          # beta = 1 (uncalibrated)
    codebook: object
    direction_index: int
    w_tx: SteeringVector
    measurement_seed: int


def build_realization(exp: ExperimentConfig, seed: int) -> Realization:
    """Deterministically derive one scenario realization from a run seed.

    Child seeds for the path set, the blockage trace and the measurement
    noise come from numpy's SeedSequence, so one integer reproduces the
    whole run.  The tracked direction is the codebook beam with the highest
    expected receive power; the transmit weight is a single active element
    ("omni", no array gain) or a fixed steered beam.
    """
    path_seed, block_seed, meas_seed = (
        int(s) for s in np.random.SeedSequence(seed).generate_state(3)
    )
    scenario = replace(exp.scenario, seed=path_seed)
    pathset = assign_doppler(
        generate_pathset(scenario, exp.bs_geom, exp.ue_geom), scenario
    )
    trace = exp.make_blockage(block_seed)
    state = ChannelState(pathset=pathset, blockage=trace, scenario=scenario, beta=1.0)
    codebook = uniform_codebook(exp.ue_geom, exp.sync.n_dir)
    direction = best_direction(pathset, codebook)
    if exp.tx_mode == "omni":
        w = np.zeros(exp.bs_geom.n_elements, dtype=complex)
        w[0] = 1.0
        w_tx = SteeringVector(w)
    else:
        w_tx = steering_vector(exp.bs_geom, exp.tx_beam_azimuth)
    return Realization(
        state=state,
        codebook=codebook,
        direction_index=direction,
        w_tx=w_tx,
        measurement_seed=meas_seed,
    )


def run_tracking(exp: ExperimentConfig, real: Realization, sync_target_linear: float):
    """Calibrate to the sync-signal level and track; returns (raw, true, beta)."""
    w_rx = real.codebook.beams[real.direction_index]
    beta = calibrate_beta(
        real.state, sync_target_linear, real.w_tx, w_rx, exp.ptx_w, exp.n0_w_per_hz,
        grid_step_s=exp.sync.measurement_period_s,
        n_freq_samples=exp.n_freq_samples,
        grid_offset_s=real.direction_index * exp.sync.t_per_s,
    )
    state = real.state.with_beta(beta)
    raw, true = track_direction(
        state, exp.sync, real.direction_index, real.codebook, real.w_tx,
        exp.ptx_w, exp.n0_w_per_hz, exp.horizon_s, real.measurement_seed,
        n_freq_samples=exp.n_freq_samples,
    )
    return raw, true, beta


def mean_error_db(
    true_trace: SnrTrace, est_trace: SnrTrace, transient_drop: int
) -> float:
    """Time-averaged dB error, skipping the filter warm-up samples."""
    series = error_series(true_trace, est_trace, domain="db")
    err = series.err[transient_drop:]
    if err.size == 0:
        raise ValueError("transient_drop leaves no samples")
    return float(np.mean(err))


def sweep_target_snr(
    exp: ExperimentConfig,
    filter_specs,
    target_grid_db,
    seeds,
) -> SweepResult:
    """Mean estimation error per (target SNR, filter), averaged across seeds.

    The realization depends only on the seed, not the target, so adjacent
    grid points see identical channels/noise and differ only through the
    calibrated scale.  Cells whose calibration is impossible (fully blocked
    trace) are recorded as NaN and the sweep continues.
    """
    specs = tuple(filter_specs)
    ids = tuple(s.filter_id for s in specs)
    targets = np.asarray(list(target_grid_db), dtype=float)
    if targets.size == 0 or not specs or not seeds:
        raise ValueError("targets, filter_specs and seeds must be nonempty")
    acc = np.zeros((targets.size, len(specs)))
    counts = np.zeros(targets.size, dtype=int)
    reals = [build_realization(exp, s) for s in seeds]
    for ti, target_db in enumerate(targets):
        sync_target = 10.0 ** (target_db / 10.0) / exp.rate_profile.n_tx
        for real in reals:
            try:
                raw, true, _ = run_tracking(exp, real, sync_target)
            except CalibrationError:
                continue
            counts[ti] += 1
            for si, spec in enumerate(specs):
                est = raw if spec.kind == "none" else filter_trace(raw, spec)
                acc[ti, si] += mean_error_db(true, est, exp.transient_drop)
    mean = np.full_like(acc, np.nan)
    ok = counts > 0
    mean[ok] = acc[ok] / counts[ok, None]
    return SweepResult(
        target_snr_db=targets, filter_ids=ids, mean_err_db=mean, n_seeds=len(seeds)
    )


def write_sweep_csv(result: SweepResult, path) -> None:
    """Rows (target_snr_db, filter_id, mean_err_db, n_seeds); missing cells 'nan'."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("target_snr_db,filter_id,mean_err_db,n_seeds\n")
        for ti, target in enumerate(result.target_snr_db):
            for si, fid in enumerate(result.filter_ids):
                val = result.mean_err_db[ti, si]
                txt = "nan" if np.isnan(val) else repr(float(val))
                fh.write(f"{float(target)!r},{fid},{txt},{result.n_seeds}\n")


def write_cdf_csv(cdf: np.ndarray, path) -> None:
    """Rows (err_db, prob)."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("err_db,prob\n")
        for v, p in cdf:
            fh.write(f"{float(v)!r},{float(p)!r}\n")
