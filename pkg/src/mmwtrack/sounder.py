"""Frequency-domain channel-sounder post-processing on synthetic captures.

The transmit side repeats one symbol: the inverse FFT of an n_points
pseudo-random QPSK sequence (unit magnitude per frequency bin, so spectral
division never hits a zero).  The receive pipeline, per block of avg_symbols
symbols and per carrier-offset hypothesis:

    derotate in time -> per-symbol FFT -> divide by the known spectrum
    -> average the symbol spectra -> inverse FFT -> squared magnitude

which yields one power delay profile (PDP) per block; the hypothesis with
the maximal PDP peak wins (ties broken toward the smaller offset magnitude).
Residual offset is compensated only up to the hypothesis grid, so the
coherent symbol average keeps a small, bounded attenuation.

make_capture replaces the RF hardware: circular per-symbol tap convolution,
one constant carrier offset per capture, optional per-symbol power envelope
(for blockage events), and white complex noise at a target SNR.
"""

from dataclasses import dataclass
import math
import struct

import numpy as np

from .blockage import BlockageTrace

_CAPTURE_MAGIC = b"MWCP"
_CAPTURE_VERSION = 1


@dataclass(frozen=True)
class SounderConfig:
    n_points: int = 128
    sample_rate_hz: float = 130e6
    avg_symbols: int = 32
    cfo_hypotheses: int = 9          # odd, spaced uniformly over +-cfo_span_hz
    cfo_span_hz: float = 50e3
    decimation: int = 4

    def __post_init__(self):
        if self.n_points < 2 or (self.n_points & (self.n_points - 1)) != 0:
            raise ValueError("n_points must be a power of two")
        if self.sample_rate_hz <= 0:
            raise ValueError("sample_rate_hz must be positive")
        if self.avg_symbols < 1 or self.decimation < 1:
            raise ValueError("avg_symbols and decimation must be >= 1")
        if self.cfo_hypotheses < 1 or self.cfo_hypotheses % 2 == 0:
            raise ValueError("cfo_hypotheses must be odd and >= 1")
        if self.cfo_span_hz < 0:
            raise ValueError("cfo_span_hz must be nonnegative")

    @property
    def symbol_period_s(self) -> float:
        return self.n_points / self.sample_rate_hz

    @property
    def frame_period_s(self) -> float:
        return self.avg_symbols * self.symbol_period_s

    def hypotheses_hz(self) -> np.ndarray:
        if self.cfo_hypotheses == 1:
            return np.zeros(1)
        return np.linspace(-self.cfo_span_hz, self.cfo_span_hz, self.cfo_hypotheses)


@dataclass(frozen=True, eq=False)
class PdpFrame:
    bins: np.ndarray        # delay-domain power, length n_points
    t: float                # block start time within the capture
    chosen_cfo_hz: float


@dataclass(frozen=True, eq=False)
class Capture:
    samples: np.ndarray          # complex baseband at sample_rate_hz
    known_sequence: np.ndarray   # one transmit symbol, length n_points

    def __post_init__(self):
        s = np.asarray(self.samples, dtype=np.complex128)
        k = np.asarray(self.known_sequence, dtype=np.complex128)
        object.__setattr__(self, "samples", s)
        object.__setattr__(self, "known_sequence", k)
        if s.size == 0 or s.size % k.size != 0:
            raise ValueError("capture length must be a nonzero multiple of n_points")


def qpsk_symbol(n_points: int, seed: int) -> np.ndarray:
    """Unit-power time-domain transmit symbol from a random QPSK spectrum."""
    rng = np.random.default_rng(seed)
    phases = math.pi / 4 + math.pi / 2 * rng.integers(0, 4, n_points)
    spectrum = np.exp(1j * phases)
    return np.fft.ifft(spectrum) * math.sqrt(n_points)


def make_capture(
    taps,
    cfo_hz: float,
    snr_db,
    n_symbols: int,
    cfg: SounderConfig,
    seed: int,
    envelope=None,
    sequence_seed=None,
) -> Capture:
    """Synthesize a received capture for a static tapped channel.

    taps: sequence of (delay_samples, complex gain) with delays < n_points.
    snr_db of None (or +inf) disables noise.  envelope, when given, is a
    per-symbol linear power scale of length n_symbols (used to imprint
    blockage events on the capture).  sequence_seed pins the transmit
    sequence independently of the noise seed; it defaults to seed.
    """
    if n_symbols < 1:
        raise ValueError("n_symbols must be >= 1")
    n = cfg.n_points
    if sequence_seed is None:
        sequence_seed = seed
    x = qpsk_symbol(n, sequence_seed)

    imp = np.zeros(n, dtype=np.complex128)
    for delay, gain in taps:
        d = int(delay)
        if d < 0 or d >= n:
            raise ValueError(f"tap delay {d} outside [0, {n})")
        imp[d] += gain
    # Circular per-symbol convolution; the repeated transmit pattern makes
    # the linear channel response periodic, so one base symbol suffices.
    base = np.fft.ifft(np.fft.fft(x) * np.fft.fft(imp))

    y = np.tile(base, n_symbols)
    if envelope is not None:
        env = np.asarray(envelope, dtype=float)
        if env.size != n_symbols:
            raise ValueError("envelope must have one entry per symbol")
        if np.any(env < 0):
            raise ValueError("envelope must be nonnegative")
        y.reshape(n_symbols, n)[...] *= np.sqrt(env)[:, None]
    if cfo_hz != 0.0:
        tt = np.arange(y.size) / cfg.sample_rate_hz
        y *= np.exp(2j * math.pi * cfo_hz * tt)
    if snr_db is not None and np.isfinite(snr_db):
        rng = np.random.default_rng(seed)
        sig_power = float(np.mean(np.abs(y) ** 2))
        noise_power = sig_power / 10.0 ** (snr_db / 10.0)
        scale = math.sqrt(noise_power / 2.0)
        y = y + scale * (
            rng.standard_normal(y.size) + 1j * rng.standard_normal(y.size)
        )
    return Capture(samples=y, known_sequence=x)


def _hypothesis_order(hyp: np.ndarray) -> np.ndarray:
    # Smaller |offset| first so an exact peak tie resolves toward it.
    return np.array(sorted(range(hyp.size), key=lambda i: (abs(hyp[i]), hyp[i])))


def estimate_pdp(cap: Capture, cfg: SounderConfig, _chunk_blocks: int = 2048):
    """Run the averaging/derotation pipeline; one PdpFrame per symbol block.

    Implementation note: derotation splits into a per-symbol phase (the
    hypothesis twist across the block) and a within-symbol ramp, so the
    symbol average reduces to one weighted sum per hypothesis followed by a
    single FFT per block instead of avg_symbols of them.
    """
    n = cfg.n_points
    if cap.known_sequence.size != n:
        raise ValueError("capture n_points does not match config")
    n_sym_total = cap.samples.size // n
    n_blocks = n_sym_total // cfg.avg_symbols
    if n_blocks < 1:
        raise ValueError(
            f"capture holds {n_sym_total} symbols; "
            f"at least {cfg.avg_symbols} needed for one averaging window"
        )

    spectrum = np.fft.fft(cap.known_sequence)
    hyp = cfg.hypotheses_hz()
    order = _hypothesis_order(hyp)
    tsym = cfg.symbol_period_s
    m = np.arange(cfg.avg_symbols)
    nn = np.arange(n)
    # weights[h, m]: block-local per-symbol derotation (mean over symbols folded in)
    sym_w = np.exp(-2j * math.pi * hyp[:, None] * (m[None, :] * tsym)) / cfg.avg_symbols
    samp_w = np.exp(-2j * math.pi * hyp[:, None] * (nn[None, :] / cfg.sample_rate_hz))

    frames = []
    usable = n_blocks * cfg.avg_symbols * n
    data = cap.samples[:usable].reshape(n_blocks, cfg.avg_symbols, n)
    for start in range(0, n_blocks, _chunk_blocks):
        chunk = data[start : start + _chunk_blocks]
        b = chunk.shape[0]
        # One copy + one matmul for every hypothesis at once; per-hypothesis
        # tensordot would re-copy the chunk each time (memory-bound).
        stacked = chunk.transpose(1, 0, 2).reshape(cfg.avg_symbols, b * n)
        acc = (sym_w @ stacked).reshape(hyp.size, b, n)
        spec = np.fft.fft(acc * samp_w[:, None, :], axis=2) / spectrum
        pdps = np.abs(np.fft.ifft(spec, axis=2)) ** 2
        peaks = pdps.max(axis=2)  # (hyp, b)
        pick = order[np.argmax(peaks[order], axis=0)]
        for j in range(b):
            block = start + j
            frames.append(
                PdpFrame(
                    # copy: a view would pin the whole per-chunk cube alive
                    bins=pdps[pick[j], j].copy(),
                    t=block * cfg.frame_period_s,
                    chosen_cfo_hz=float(hyp[pick[j]]),
                )
            )
    return frames


def trace_from_peaks(peaks, cfg: SounderConfig, label: str = "sounder") -> BlockageTrace:
    """Decimate per-frame peak powers and normalize the median to one."""
    peaks = np.asarray(peaks, dtype=float)
    kept = peaks[:: cfg.decimation]
    med = float(np.median(kept))
    if med <= 0:
        raise ValueError("peak trace has nonpositive median; cannot normalize")
    return BlockageTrace(
        samples=kept / med,
        sample_period_s=cfg.decimation * cfg.frame_period_s,
        label=label,
    )


def extract_blockage(frames, cfg: SounderConfig) -> BlockageTrace:
    """Local blockage trace from the strongest PDP bin of each frame."""
    if not frames:
        raise ValueError("no frames")
    peaks = np.array([float(np.max(fr.bins)) for fr in frames])
    return trace_from_peaks(peaks, cfg)


def write_capture(cap: Capture, cfg: SounderConfig, path) -> None:
    """Binary capture: header then float32 little-endian interleaved I/Q.

    Layout: magic 'MWCP', u32 version, u32 n_points, f64 sample_rate_hz,
    u64 n_symbols, then the known sequence (n_points I/Q pairs) and the
    samples.  float32 storage quantizes the in-memory complex128 data.
    """
    n = cap.known_sequence.size
    n_symbols = cap.samples.size // n
    header = _CAPTURE_MAGIC + struct.pack(
        "<IIdQ", _CAPTURE_VERSION, n, cfg.sample_rate_hz, n_symbols
    )
    with open(path, "wb") as fh:
        fh.write(header)
        for arr in (cap.known_sequence, cap.samples):
            iq = np.empty(arr.size * 2, dtype="<f4")
            iq[0::2] = arr.real
            iq[1::2] = arr.imag
            fh.write(iq.tobytes())


def load_capture(path):
    """Read a capture written by write_capture; returns (Capture, sample_rate_hz)."""
    with open(path, "rb") as fh:
        magic = fh.read(4)
        if magic != _CAPTURE_MAGIC:
            raise ValueError(f"{path}: not a capture file")
        version, n, rate, n_symbols = struct.unpack("<IIdQ", fh.read(24))
        if version != _CAPTURE_VERSION:
            raise ValueError(f"{path}: unsupported capture version {version}")
        raw = np.frombuffer(fh.read(), dtype="<f4")
    expected = 2 * n * (n_symbols + 1)
    if raw.size != expected:
        raise ValueError(f"{path}: truncated capture ({raw.size} != {expected} floats)")
    cplx = raw[0::2].astype(np.float64) + 1j * raw[1::2].astype(np.float64)
    return Capture(samples=cplx[n:], known_sequence=cplx[:n]), rate


def write_pdp_csv(frames, path) -> None:
    """PDP CSV: t_s, one column per delay bin, chosen_cfo_hz."""
    if not frames:
        raise ValueError("no frames")
    n = frames[0].bins.size
    cols = ",".join(f"bin_{i}" for i in range(n))
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"t_s,{cols},chosen_cfo_hz\n")
        for fr in frames:
            bins = ",".join(repr(float(b)) for b in fr.bins)
            fh.write(f"{fr.t!r},{bins},{fr.chosen_cfo_hz!r}\n")
