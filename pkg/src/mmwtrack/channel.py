"""Multipath channel generation and evaluation.

The channel is a sum of L discrete paths.  Path ell carries linear power
P_ell (normalized so the powers sum to one), delay tau_ell, Doppler shift
f_d_ell and transmit/receive spatial signatures.  The narrowband response
between beams w_tx / w_rx at time t and absolute frequency f is

    (1/sqrt(L)) * sum_ell sqrt(g_ell(t))
        * exp(2j*pi*(f_d_ell*t - tau_ell*f))
        * (w_rx^H u_rx_ell) * (u_tx_ell^H w_tx)

with the common blockage modulation g_ell(t) = beta * P_ell * h(t): one
measured or synthetic local-blockage factor h(t) attenuates every path, and
beta is the calibration scale that sets the operating SNR.

The wideband SNR is the band-averaged squared response times P_tx/(N0*W).
"""

from dataclasses import dataclass, replace
from functools import lru_cache
import math

import numpy as np

from . import kernels
from .arrays import ArrayGeometry, BeamCodebook, SteeringVector, steering_vector
from .blockage import BlockageTrace

SPEED_OF_LIGHT = 299792458.0


@dataclass(frozen=True, eq=False)
class Path:
    power: float          # linear, relative
    delay_s: float
    doppler_hz: float
    aoa_azimuth: float    # radians
    aod_azimuth: float
    sig_rx: SteeringVector
    sig_tx: SteeringVector

    def __post_init__(self):
        if self.power < 0 or self.delay_s < 0:
            raise ValueError("power and delay must be nonnegative")


@dataclass(frozen=True, eq=False)
class PathSet:
    paths: tuple

    def __post_init__(self):
        object.__setattr__(self, "paths", tuple(self.paths))
        if len(self.paths) < 1:
            raise ValueError("at least one path required")

    @property
    def L(self) -> int:
        return len(self.paths)

    def powers(self) -> np.ndarray:
        return np.array([p.power for p in self.paths])

    def delays(self) -> np.ndarray:
        return np.array([p.delay_s for p in self.paths])

    def dopplers(self) -> np.ndarray:
        return np.array([p.doppler_hz for p in self.paths])


@dataclass(frozen=True)
class ScenarioConfig:
    carrier_hz: float = 60e9
    bandwidth_hz: float = 500e6
    ue_speed_mps: float = 1.0
    motion_azimuth: float = 0.0      # radians
    path_count_mean: float = 10.0
    delay_spread_s: float = 100e-9
    power_decay_db_per_ns: float = 0.1
    seed: int = 0

    def __post_init__(self):
        if self.carrier_hz <= 0 or self.bandwidth_hz <= 0:
            raise ValueError("carrier_hz and bandwidth_hz must be positive")
        if self.path_count_mean <= 0 or self.delay_spread_s <= 0:
            raise ValueError("path_count_mean and delay_spread_s must be positive")
        if self.ue_speed_mps < 0:
            raise ValueError("ue_speed_mps must be nonnegative")


@dataclass(frozen=True, eq=False)
class ChannelState:
    """Immutable snapshot: path set + blockage trace + calibration scale."""

    pathset: PathSet
    blockage: BlockageTrace
    scenario: ScenarioConfig
    beta: float = 1.0

    def __post_init__(self):
        if self.beta <= 0:
            raise ValueError("beta must be positive")

    def with_beta(self, beta: float) -> "ChannelState":
        return replace(self, beta=beta)


def generate_pathset(
    cfg: ScenarioConfig, bs_geom: ArrayGeometry, ue_geom: ArrayGeometry
) -> PathSet:
    """Draw a random path set, reproducible from cfg.seed.

    Path count is max(1, Poisson(path_count_mean)); delays are exponential
    with mean delay_spread_s; linear powers decay exponentially with delay at
    power_decay_db_per_ns and are normalized to sum to one; arrival and
    departure azimuths are uniform; spatial signatures are steering vectors
    at those azimuths.  Draw order (count, delays, AoA, AoD) is fixed so a
    seed pins the whole set.  Doppler shifts start at zero; use
    assign_doppler for the motion-dependent values.
    """
    rng = np.random.default_rng(cfg.seed)
    n = max(1, int(rng.poisson(cfg.path_count_mean)))
    delays = rng.exponential(cfg.delay_spread_s, n)
    aoa = rng.uniform(-math.pi, math.pi, n)
    aod = rng.uniform(-math.pi, math.pi, n)
    powers = 10.0 ** (-cfg.power_decay_db_per_ns * delays * 1e9 / 10.0)
    powers /= powers.sum()
    paths = tuple(
        Path(
            power=float(powers[i]),
            delay_s=float(delays[i]),
            doppler_hz=0.0,
            aoa_azimuth=float(aoa[i]),
            aod_azimuth=float(aod[i]),
            sig_rx=steering_vector(ue_geom, float(aoa[i])),
            sig_tx=steering_vector(bs_geom, float(aod[i])),
        )
        for i in range(n)
    )
    return PathSet(paths=paths)


def assign_doppler(pathset: PathSet, cfg: ScenarioConfig) -> PathSet:
    """Doppler per path: f_d_max * cos(angle between arrival and motion)."""
    fd_max = cfg.ue_speed_mps * cfg.carrier_hz / SPEED_OF_LIGHT
    paths = tuple(
        replace(p, doppler_hz=fd_max * math.cos(p.aoa_azimuth - cfg.motion_azimuth))
        for p in pathset.paths
    )
    return PathSet(paths=paths)


def max_doppler_hz(cfg: ScenarioConfig) -> float:
    return cfg.ue_speed_mps * cfg.carrier_hz / SPEED_OF_LIGHT


def path_couplings(
    pathset: PathSet, w_tx: SteeringVector, w_rx: SteeringVector
) -> np.ndarray:
    """Per-path complex amplitude sqrt(P) * (w_rx^H u_rx) * (u_tx^H w_tx)."""
    amp = np.empty(pathset.L, dtype=np.complex128)
    for i, p in enumerate(pathset.paths):
        if len(w_rx) != len(p.sig_rx) or len(w_tx) != len(p.sig_tx):
            raise ValueError("beam length does not match path signature length")
        amp[i] = (
            math.sqrt(p.power)
            * np.vdot(w_rx.weights, p.sig_rx.weights)
            * np.vdot(p.sig_tx.weights, w_tx.weights)
        )
    return amp


# Tracking evaluates the same (pathset, beams) triple thousands of times;
# the frozen types hash by identity, so a small cache removes the rebuild.
@lru_cache(maxsize=64)
def _cached_link(pathset: PathSet, w_tx: SteeringVector, w_rx: SteeringVector):
    return (
        path_couplings(pathset, w_tx, w_rx),
        np.ascontiguousarray(pathset.delays()),
        np.ascontiguousarray(pathset.dopplers()),
    )


def best_direction(pathset: PathSet, codebook: BeamCodebook) -> int:
    """Codebook index maximizing the expected receive beam power
    sum_ell P_ell |<w, u_rx_ell>|^2 (deterministic tie-break: lowest index)."""
    powers = pathset.powers()
    best, best_val = 0, -1.0
    for d, beam in enumerate(codebook.beams):
        gains = np.array(
            [abs(np.vdot(beam.weights, p.sig_rx.weights)) ** 2 for p in pathset.paths]
        )
        val = float(powers @ gains)
        if val > best_val:
            best, best_val = d, val
    return best


def _response_batch(state, t, f, w_tx, w_rx):
    """Beamformed response at paired (t, f) samples, blockage applied."""
    t = np.atleast_1d(np.asarray(t, dtype=float))
    f = np.atleast_1d(np.asarray(f, dtype=float))
    amp, tau, fd = _cached_link(state.pathset, w_tx, w_rx)
    h = state.blockage.value_at(t)
    scale = np.sqrt(state.beta * h / state.pathset.L)
    resp = kernels.phasor_response(
        amp, tau, fd, np.ascontiguousarray(t), np.ascontiguousarray(f)
    )
    return scale * resp


def channel_response(
    state: ChannelState, t: float, f: float, w_tx: SteeringVector, w_rx: SteeringVector
) -> complex:
    """Beamformed narrowband response w_rx^H H(t, f) w_tx.

    t must lie inside the blockage trace span; f is an absolute frequency
    within the system band.
    """
    return complex(_response_batch(state, t, f, w_tx, w_rx)[0])


def _freq_grid(cfg: ScenarioConfig, n: int) -> np.ndarray:
    # Midpoint rule over [f_c - W/2, f_c + W/2].
    return cfg.carrier_hz - cfg.bandwidth_hz / 2 + (np.arange(n) + 0.5) * (
        cfg.bandwidth_hz / n
    )


def true_wideband_snr(
    state: ChannelState,
    t,
    w_tx: SteeringVector,
    w_rx: SteeringVector,
    ptx_w: float,
    n0_w_per_hz: float,
    n_freq_samples: int = 64,
):
    """Wideband SNR gamma(t) = G(t) * P_tx / (N0 * W_tot).

    G(t) is the band-average of |w_rx^H H(t, f) w_tx|^2, approximated by a
    midpoint rule with n_freq_samples uniform frequencies.  Scalar t gives a
    scalar; an array gives one value per instant.
    """
    if n_freq_samples < 1:
        raise ValueError("n_freq_samples must be >= 1")
    scalar = np.isscalar(t) or np.ndim(t) == 0
    t_arr = np.atleast_1d(np.asarray(t, dtype=float))
    amp, tau, fd = _cached_link(state.pathset, w_tx, w_rx)
    h = state.blockage.value_at(t_arr)
    fgrid = _freq_grid(state.scenario, n_freq_samples)
    gain = kernels.mean_gain_grid(
        amp, tau, fd, np.ascontiguousarray(t_arr), np.ascontiguousarray(fgrid)
    )
    g = gain * state.beta * h / state.pathset.L
    gamma = g * ptx_w / (n0_w_per_hz * state.scenario.bandwidth_hz)
    return float(gamma[0]) if scalar else gamma


def write_pathset_csv(pathset: PathSet, path) -> None:
    """One row per path: power, delay_ns, doppler_hz, aoa_deg, aod_deg."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("power,delay_ns,doppler_hz,aoa_deg,aod_deg\n")
        for p in pathset.paths:
            fh.write(
                f"{p.power!r},{p.delay_s * 1e9!r},{p.doppler_hz!r},"
                f"{math.degrees(p.aoa_azimuth)!r},{math.degrees(p.aod_azimuth)!r}\n"
            )
