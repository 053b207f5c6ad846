"""mmwtrack: link-level mmWave downlink SNR tracking.

Generates blockage-modulated multipath channels, simulates sparse
directional synchronization-signal measurements, forms the unbiased raw
wideband-SNR estimate, applies linear filtering, and evaluates estimation
error against the true SNR.
"""

__version__ = "0.1.0"

from . import arrays, blockage, calib, channel, config, evaluate, filters, sounder, syncsig
from .kernels import backend_name

__all__ = [
    "arrays",
    "blockage",
    "calib",
    "channel",
    "config",
    "evaluate",
    "filters",
    "sounder",
    "syncsig",
    "backend_name",
    "__version__",
]
