"""Pure-numpy kernel implementations (fallback backend)."""

import numpy as np


def phasor_response(amp, tau, fd, t, f):
    """Pairwise multipath phasor sum.

    out[n] = sum_l amp[l] * exp(2j*pi*(fd[l]*t[n] - tau[l]*f[n]))

    amp is complex (per-path amplitude including beam coupling), tau/fd are
    the per-path delays [s] and Doppler shifts [Hz]; t and f are equal-length
    sample arrays.
    """
    phase = t[:, None] * fd[None, :] - f[:, None] * tau[None, :]
    return np.exp(2j * np.pi * phase) @ amp


def mean_gain_grid(amp, tau, fd, t, f):
    """Mean squared response over a frequency grid, per time instant.

    out[n] = mean_m |sum_l amp[l] * exp(2j*pi*(fd[l]*t[n] - tau[l]*f[m]))|^2
    """
    # (N, M, L) phase cube; tracking-sized inputs (625 x 64 x L) stay small.
    phase = fd[None, None, :] * t[:, None, None] - tau[None, None, :] * f[None, :, None]
    h = np.exp(2j * np.pi * phase) @ amp
    return np.mean(np.abs(h) ** 2, axis=1)
