"""Target-SNR derivation from baseline rates.

A cellular baseline spectral efficiency fixes a reference rate; scaling to
the wider mmWave band gives the rate goal; inverting Shannon capacity with a
control-overhead factor gives the data-channel target SNR; dividing by the
transmit array size removes the beamforming gain that synchronization
signals do not enjoy.
"""

from dataclasses import dataclass
import math

# Baseline spectral efficiencies (bit/s/Hz): median user and 5% edge user.
SPECTRAL_EFF = {"p50": 3.28, "p5": 0.154}


@dataclass(frozen=True)
class RateProfile:
    percentile: str = "p5"
    lte_spectral_eff: float = SPECTRAL_EFF["p5"]
    lte_bw_hz: float = 50e6
    mmw_bw_hz: float = 500e6
    mmw_multiplier: float = 9.0
    overhead_delta: float = 0.8   # fraction of airtime carrying data
    n_tx: int = 64

    def __post_init__(self):
        if self.percentile not in SPECTRAL_EFF:
            raise ValueError("percentile must be 'p50' or 'p5'")
        if not (0.0 < self.overhead_delta <= 1.0):
            raise ValueError("overhead_delta must lie in (0, 1]")
        for name in ("lte_spectral_eff", "lte_bw_hz", "mmw_bw_hz", "mmw_multiplier"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if self.n_tx < 1:
            raise ValueError("n_tx must be >= 1")


def default_profile(percentile: str, **overrides) -> RateProfile:
    return RateProfile(
        percentile=percentile,
        lte_spectral_eff=overrides.pop("lte_spectral_eff", SPECTRAL_EFF[percentile]),
        **overrides,
    )


def mmwave_rate(profile: RateProfile) -> float:
    """Rate goal in bit/s: baseline efficiency x baseline bandwidth x multiplier."""
    return profile.lte_spectral_eff * profile.lte_bw_hz * profile.mmw_multiplier


def target_snr(profile: RateProfile, rate_bps: float) -> float:
    """Linear SNR gamma_t solving rate = delta * W * log2(1 + gamma_t)."""
    if rate_bps < 0:
        raise ValueError("rate_bps must be nonnegative")
    return 2.0 ** (rate_bps / (profile.overhead_delta * profile.mmw_bw_hz)) - 1.0


def sync_level(gamma_t: float, n_tx: int) -> float:
    """Synchronization-signal SNR: the target without the TX array gain."""
    if n_tx < 1:
        raise ValueError("n_tx must be >= 1")
    return gamma_t / n_tx


def to_db(x: float) -> float:
    return 10.0 * math.log10(x)


def from_db(x_db: float) -> float:
    return 10.0 ** (x_db / 10.0)
