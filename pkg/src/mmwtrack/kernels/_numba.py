"""Numba kernel implementations.

Serial loops on purpose: summation order is fixed, so repeated runs are
bit-identical (parallel reductions would not be).
"""

import numpy as np
from numba import njit

_TWO_PI = 2.0 * np.pi


@njit(cache=True)
def phasor_response(amp, tau, fd, t, f):
    n = t.shape[0]
    npaths = amp.shape[0]
    out = np.empty(n, dtype=np.complex128)
    for i in range(n):
        acc = 0.0 + 0.0j
        for l in range(npaths):
            ph = _TWO_PI * (fd[l] * t[i] - tau[l] * f[i])
            acc += amp[l] * complex(np.cos(ph), np.sin(ph))
        out[i] = acc
    return out


@njit(cache=True)
def mean_gain_grid(amp, tau, fd, t, f):
    n = t.shape[0]
    m = f.shape[0]
    npaths = amp.shape[0]
    out = np.empty(n, dtype=np.float64)
    for i in range(n):
        s = 0.0
        for k in range(m):
            acc = 0.0 + 0.0j
            for l in range(npaths):
                ph = _TWO_PI * (fd[l] * t[i] - tau[l] * f[k])
                acc += amp[l] * complex(np.cos(ph), np.sin(ph))
            s += acc.real * acc.real + acc.imag * acc.imag
        out[i] = s / m
    return out
