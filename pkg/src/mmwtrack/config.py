"""Experiment configuration: one structured YAML file governs every run.

Every section has explicit defaults; unknown keys are rejected with their
full path so a typo never silently falls back to a default.  Angles are
degrees in the file and radians in memory.
"""

from dataclasses import dataclass, field
import math

import yaml

from .arrays import ArrayGeometry
from .blockage import BlockageEventSpec, event_defaults, load_trace, synthesize_trace
from .calib import RateProfile, default_profile
from .channel import ScenarioConfig
from .filters import FilterSpec
from .sounder import SounderConfig
from .syncsig import SyncConfig

import dataclasses


class ConfigError(ValueError):
    """Invalid configuration; message carries the offending key path."""


@dataclass(frozen=True)
class ExperimentConfig:
    scenario: ScenarioConfig = ScenarioConfig()
    sync: SyncConfig = SyncConfig()
    bs_geom: ArrayGeometry = ArrayGeometry(8, 8)
    ue_geom: ArrayGeometry = ArrayGeometry(4, 4)
    tx_mode: str = "omni"              # "omni" or "fixed_beam"
    tx_beam_azimuth: float = 0.0       # radians, fixed_beam only
    blockage_source: str = "synthetic"  # "synthetic" or "file"
    blockage_spec: BlockageEventSpec = field(
        default_factory=lambda: event_defaults("walker")
    )
    trace_path: str | None = None
    rate_profile: RateProfile = RateProfile()
    filters: tuple = (
        FilterSpec(kind="first_order", alpha=0.3),
        FilterSpec(kind="moving_average", window_m=4),
    )
    horizon_s: float = 10.0
    n_freq_samples: int = 64
    transient_drop: int = 10
    cdf_points: int = 100
    target_grid_db: tuple = tuple(float(x) for x in range(-30, 30, 5))
    seeds: tuple = (12345,)
    output_dir: str = "out"
    ptx_w: float = 1.0
    n0_w_per_hz: float = 1e-17
    sounder: SounderConfig = SounderConfig(sample_rate_hz=128e6)
    sounder_duration_s: float = 10.0
    sounder_cfo_hz: float = 0.0
    sounder_snr_db: float | None = None
    sounder_taps: tuple = ((0, 1.0 + 0.0j),)
    sounder_event_kind: str | None = "walker"
    sounder_seed: int = 0
    pdp_csv_max_frames: int = 256
    segment_symbols: int = 65536

    def __post_init__(self):
        if not self.seeds:
            raise ConfigError("seeds: at least one seed required")
        if self.tx_mode not in ("omni", "fixed_beam"):
            raise ConfigError(f"tx_mode: unknown mode {self.tx_mode!r}")
        if self.blockage_source not in ("synthetic", "file"):
            raise ConfigError(f"blockage.source: unknown source {self.blockage_source!r}")
        if self.blockage_source == "file" and not self.trace_path:
            raise ConfigError("blockage.trace_path: required when source is 'file'")
        if self.sync.n_sig * self.sync.w_sig_hz > self.scenario.bandwidth_hz:
            raise ConfigError(
                "sync: n_sig * w_sig_hz exceeds the system bandwidth"
            )
        if self.segment_symbols % (self.sounder.avg_symbols * self.sounder.decimation):
            raise ConfigError(
                "sounder.segment_symbols must be a multiple of avg_symbols * decimation"
            )

    def make_blockage(self, seed: int):
        """Blockage trace for one run seed (file traces ignore the seed)."""
        if self.blockage_source == "file":
            return load_trace(self.trace_path)
        return synthesize_trace(dataclasses.replace(self.blockage_spec, seed=seed))


def _merge(defaults: dict, given: dict, path: str) -> dict:
    if given is None:
        return dict(defaults)
    if not isinstance(given, dict):
        raise ConfigError(f"{path}: expected a mapping")
    out = dict(defaults)
    for key, val in given.items():
        if key not in defaults:
            raise ConfigError(f"{path}.{key}: unknown key")
        out[key] = val
    return out


_SCENARIO_DEFAULTS = dict(
    carrier_hz=60e9, bandwidth_hz=500e6, ue_speed_mps=1.0, motion_azimuth_deg=0.0,
    path_count_mean=10.0, delay_spread_s=100e-9, power_decay_db_per_ns=0.1,
)
_ARRAYS_DEFAULTS = dict(
    bs_rows=8, bs_cols=8, ue_rows=4, ue_cols=4, element_spacing=0.5,
    tx_mode="omni", tx_beam_azimuth_deg=0.0,
)
_SYNC_DEFAULTS = dict(
    t_per_s=1e-3, t_sig_s=10e-6, n_sig=4, w_sig_hz=1e6, n_dir=16,
    freq_placement="random", noise_enabled=True,
)
_BLOCKAGE_DEFAULTS = dict(
    source="synthetic", trace_path=None, event_kind="walker", depth_db=None,
    event_rate_hz=None, transition_s=None, hold_s=None, duration_s=10.0,
    sample_period_s=128e-6, ramp="raised_cosine",
)
_RATE_DEFAULTS = dict(
    percentile="p5", lte_spectral_eff=None, lte_bw_hz=50e6, mmw_bw_hz=500e6,
    mmw_multiplier=9.0, overhead_delta=0.8, n_tx=64,
)
_LINK_DEFAULTS = dict(ptx_w=1.0, n0_w_per_hz=1e-17)
_TRACE_DEFAULTS = dict(horizon_s=10.0, n_freq_samples=64, transient_drop=10,
                       cdf_points=100)
_SWEEP_DEFAULTS = dict(target_grid_db=[float(x) for x in range(-30, 30, 5)])
_SOUNDER_DEFAULTS = dict(
    n_points=128, sample_rate_hz=128e6, avg_symbols=32, cfo_hypotheses=9,
    cfo_span_hz=50e3, decimation=4, duration_s=10.0, cfo_hz=0.0, snr_db=None,
    taps=[dict(delay_samples=0, gain_db=0.0, phase_deg=0.0)],
    event_kind="walker", seed=0, pdp_csv_max_frames=256, segment_symbols=65536,
)
_FILTER_KEYS = ("kind", "alpha", "window_m", "init")
_TOP_KEYS = ("output_dir", "seeds", "link", "scenario", "arrays", "sync",
             "blockage", "rate_profile", "filters", "trace", "sweep", "sounder")


def _parse_filters(items, path: str):
    if items is None:
        return (
            FilterSpec(kind="first_order", alpha=0.3),
            FilterSpec(kind="moving_average", window_m=4),
        )
    if not isinstance(items, list):
        raise ConfigError(f"{path}: expected a list of filter specs")
    specs = []
    for i, item in enumerate(items):
        if not isinstance(item, dict):
            raise ConfigError(f"{path}[{i}]: expected a mapping")
        for key in item:
            if key not in _FILTER_KEYS:
                raise ConfigError(f"{path}[{i}].{key}: unknown key")
        try:
            specs.append(FilterSpec(**item))
        except ValueError as exc:
            raise ConfigError(f"{path}[{i}]: {exc}") from exc
    return tuple(specs)


def _parse_taps(items, path: str):
    taps = []
    for i, item in enumerate(items):
        if not isinstance(item, dict):
            raise ConfigError(f"{path}[{i}]: expected a mapping")
        for key in item:
            if key not in ("delay_samples", "gain_db", "phase_deg"):
                raise ConfigError(f"{path}[{i}].{key}: unknown key")
        gain = 10.0 ** (float(item.get("gain_db", 0.0)) / 20.0)
        phase = math.radians(float(item.get("phase_deg", 0.0)))
        taps.append((int(item.get("delay_samples", 0)), gain * complex(math.cos(phase), math.sin(phase))))
    return tuple(taps)


def config_from_dict(raw: dict) -> ExperimentConfig:
    """Build an ExperimentConfig from a parsed YAML mapping."""
    if raw is None:
        raw = {}
    if not isinstance(raw, dict):
        raise ConfigError("top level: expected a mapping")
    for key in raw:
        if key not in _TOP_KEYS:
            raise ConfigError(f"{key}: unknown key")

    scen = _merge(_SCENARIO_DEFAULTS, raw.get("scenario"), "scenario")
    arrays_sec = _merge(_ARRAYS_DEFAULTS, raw.get("arrays"), "arrays")
    sync_sec = _merge(_SYNC_DEFAULTS, raw.get("sync"), "sync")
    block_sec = _merge(_BLOCKAGE_DEFAULTS, raw.get("blockage"), "blockage")
    rate_sec = _merge(_RATE_DEFAULTS, raw.get("rate_profile"), "rate_profile")
    link_sec = _merge(_LINK_DEFAULTS, raw.get("link"), "link")
    trace_sec = _merge(_TRACE_DEFAULTS, raw.get("trace"), "trace")
    sweep_sec = _merge(_SWEEP_DEFAULTS, raw.get("sweep"), "sweep")
    sndr = _merge(_SOUNDER_DEFAULTS, raw.get("sounder"), "sounder")

    try:
        scenario = ScenarioConfig(
            carrier_hz=float(scen["carrier_hz"]),
            bandwidth_hz=float(scen["bandwidth_hz"]),
            ue_speed_mps=float(scen["ue_speed_mps"]),
            motion_azimuth=math.radians(float(scen["motion_azimuth_deg"])),
            path_count_mean=float(scen["path_count_mean"]),
            delay_spread_s=float(scen["delay_spread_s"]),
            power_decay_db_per_ns=float(scen["power_decay_db_per_ns"]),
        )
        sync = SyncConfig(
            t_per_s=float(sync_sec["t_per_s"]),
            t_sig_s=float(sync_sec["t_sig_s"]),
            n_sig=int(sync_sec["n_sig"]),
            w_sig_hz=float(sync_sec["w_sig_hz"]),
            n_dir=int(sync_sec["n_dir"]),
            freq_placement=str(sync_sec["freq_placement"]),
            noise_enabled=bool(sync_sec["noise_enabled"]),
        )
        kind = str(block_sec["event_kind"])
        overrides = {
            key: float(block_sec[src])
            for key, src in (
                ("depth_db", "depth_db"),
                ("event_rate_hz", "event_rate_hz"),
                ("transition_s", "transition_s"),
                ("hold_s", "hold_s"),
            )
            if block_sec[src] is not None
        }
        blockage_spec = event_defaults(
            kind,
            duration_s=float(block_sec["duration_s"]),
            sample_period_s=float(block_sec["sample_period_s"]),
            ramp=str(block_sec["ramp"]),
            **overrides,
        )
        percentile = str(rate_sec["percentile"])
        eff = rate_sec["lte_spectral_eff"]
        profile = default_profile(
            percentile,
            **(dict(lte_spectral_eff=float(eff)) if eff is not None else {}),
            lte_bw_hz=float(rate_sec["lte_bw_hz"]),
            mmw_bw_hz=float(rate_sec["mmw_bw_hz"]),
            mmw_multiplier=float(rate_sec["mmw_multiplier"]),
            overhead_delta=float(rate_sec["overhead_delta"]),
            n_tx=int(rate_sec["n_tx"]),
        )
        sounder = SounderConfig(
            n_points=int(sndr["n_points"]),
            sample_rate_hz=float(sndr["sample_rate_hz"]),
            avg_symbols=int(sndr["avg_symbols"]),
            cfo_hypotheses=int(sndr["cfo_hypotheses"]),
            cfo_span_hz=float(sndr["cfo_span_hz"]),
            decimation=int(sndr["decimation"]),
        )
        seeds = raw.get("seeds", [12345])
        if not isinstance(seeds, list) or not seeds:
            raise ConfigError("seeds: expected a nonempty list of integers")
        snr_db = sndr["snr_db"]
        return ExperimentConfig(
            scenario=scenario,
            sync=sync,
            bs_geom=ArrayGeometry(
                int(arrays_sec["bs_rows"]), int(arrays_sec["bs_cols"]),
                float(arrays_sec["element_spacing"]),
            ),
            ue_geom=ArrayGeometry(
                int(arrays_sec["ue_rows"]), int(arrays_sec["ue_cols"]),
                float(arrays_sec["element_spacing"]),
            ),
            tx_mode=str(arrays_sec["tx_mode"]),
            tx_beam_azimuth=math.radians(float(arrays_sec["tx_beam_azimuth_deg"])),
            blockage_source=str(block_sec["source"]),
            blockage_spec=blockage_spec,
            trace_path=block_sec["trace_path"],
            rate_profile=profile,
            filters=_parse_filters(raw.get("filters"), "filters"),
            horizon_s=float(trace_sec["horizon_s"]),
            n_freq_samples=int(trace_sec["n_freq_samples"]),
            transient_drop=int(trace_sec["transient_drop"]),
            cdf_points=int(trace_sec["cdf_points"]),
            target_grid_db=tuple(float(x) for x in sweep_sec["target_grid_db"]),
            seeds=tuple(int(s) for s in seeds),
            output_dir=str(raw.get("output_dir", "out")),
            ptx_w=float(link_sec["ptx_w"]),
            n0_w_per_hz=float(link_sec["n0_w_per_hz"]),
            sounder=sounder,
            sounder_duration_s=float(sndr["duration_s"]),
            sounder_cfo_hz=float(sndr["cfo_hz"]),
            sounder_snr_db=None if snr_db is None else float(snr_db),
            sounder_taps=_parse_taps(sndr["taps"], "sounder.taps"),
            sounder_event_kind=(
                None if sndr["event_kind"] in (None, "none")
                else str(sndr["event_kind"])
            ),
            sounder_seed=int(sndr["seed"]),
            pdp_csv_max_frames=int(sndr["pdp_csv_max_frames"]),
            segment_symbols=int(sndr["segment_symbols"]),
        )
    except ConfigError:
        raise
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc


def load_config(path) -> ExperimentConfig:
    with open(path, "r", encoding="utf-8") as fh:
        raw = yaml.safe_load(fh)
    return config_from_dict(raw)


def config_to_dict(exp: ExperimentConfig) -> dict:
    """Fully resolved config as plain data, for the run manifest."""

    def plain(obj):
        if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
            return {k: plain(v) for k, v in dataclasses.asdict(obj).items()}
        if isinstance(obj, complex):
            return [obj.real, obj.imag]
        if isinstance(obj, (list, tuple)):
            return [plain(v) for v in obj]
        return obj

    out = {}
    for f in dataclasses.fields(exp):
        out[f.name] = plain(getattr(exp, f.name))
    return out
