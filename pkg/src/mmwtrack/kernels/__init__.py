"""Hot-path numeric kernels with a numba backend and a pure-numpy fallback.

The multipath frequency-response sum is evaluated millions of times during
tracking runs, Monte-Carlo estimator studies and target-SNR sweeps, so it is
implemented twice:

* ``mmwtrack.kernels._numba`` -- serial ``@njit`` loops (deterministic
  summation order, cached compilation),
* ``mmwtrack.kernels._numpy`` -- vectorized numpy equivalents.

Backend selection is controlled by the ``MMWTRACK_BACKEND`` environment
variable: ``"numba"``, ``"numpy"``, or unset (numba when importable, numpy
otherwise).  ``benchmarks/bench_kernels.py`` compares the two.
"""

import os

from . import _numpy as _numpy_impl

_requested = os.environ.get("MMWTRACK_BACKEND", "").strip().lower()
if _requested not in ("", "numba", "numpy"):
    raise RuntimeError(
        "MMWTRACK_BACKEND must be 'numba' or 'numpy', got %r" % _requested
    )

_impl = _numpy_impl
_name = "numpy"
if _requested in ("", "numba"):
    try:
        from . import _numba as _numba_impl

        _impl = _numba_impl
        _name = "numba"
    except ImportError:
        if _requested == "numba":
            raise


def backend_name() -> str:
    """Name of the active kernel backend ('numba' or 'numpy')."""
    return _name


phasor_response = _impl.phasor_response
mean_gain_grid = _impl.mean_gain_grid
