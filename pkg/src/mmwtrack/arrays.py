"""Antenna array geometry, steering vectors and beamforming codebooks.

Planar arrays live in the y-z plane with boresight along +x.  Azimuth is
measured from +x toward +y, elevation from the horizontal plane toward +z.
Element spacing is given in carrier wavelengths, so steering phases never
need an absolute frequency.
"""

from dataclasses import dataclass
import math

import numpy as np

_NORM_TOL = 1e-12


@dataclass(frozen=True)
class ArrayGeometry:
    """Uniform planar array: rows stack along z, columns along y."""

    rows: int
    cols: int
    element_spacing: float = 0.5  # in wavelengths

    def __post_init__(self):
        if self.rows < 1 or self.cols < 1:
            raise ValueError("array must have at least one row and one column")
        if self.element_spacing <= 0:
            raise ValueError("element_spacing must be positive")

    @property
    def n_elements(self) -> int:
        return self.rows * self.cols

    def element_positions(self) -> np.ndarray:
        """(n_elements, 2) array of (y, z) positions in wavelengths."""
        r, c = np.meshgrid(np.arange(self.rows), np.arange(self.cols), indexing="ij")
        pos = np.column_stack([c.ravel(), r.ravel()]).astype(float)
        return pos * self.element_spacing


@dataclass(frozen=True, eq=False)
class SteeringVector:
    """Unit-norm complex weight vector over the array elements."""

    weights: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=np.complex128)
        object.__setattr__(self, "weights", w)
        if w.ndim != 1 or w.size == 0:
            raise ValueError("weights must be a nonempty 1-D sequence")
        norm = np.linalg.norm(w)
        if abs(norm - 1.0) > _NORM_TOL:
            raise ValueError(f"weights must have unit norm, got {norm!r}")

    def __len__(self) -> int:
        return self.weights.size


@dataclass(frozen=True, eq=False)
class BeamCodebook:
    """Fixed set of receive (or transmit) beams scanned round-robin."""

    beams: tuple
    azimuths: np.ndarray  # radians, strictly increasing, within [-pi, pi)

    def __post_init__(self):
        if len(self.beams) == 0:
            raise ValueError("codebook must contain at least one beam")
        az = np.asarray(self.azimuths, dtype=float)
        object.__setattr__(self, "azimuths", az)
        object.__setattr__(self, "beams", tuple(self.beams))
        if az.size != len(self.beams):
            raise ValueError("one azimuth per beam required")
        if np.any(np.diff(az) <= 0):
            raise ValueError("azimuths must be strictly increasing")
        if az.size and (az[0] < -math.pi or az[-1] >= math.pi):
            raise ValueError("azimuths must lie in [-pi, pi)")

    @property
    def n_dir(self) -> int:
        return len(self.beams)


def steering_vector(geom: ArrayGeometry, azimuth: float, elevation: float = 0.0) -> SteeringVector:
    """Unit-norm steering vector toward (azimuth, elevation).

    Element m at position p_m (wavelengths) carries phase
    2*pi*<p_m, k(az, el)> with k = (cos el sin az, sin el) projected on the
    (y, z) array plane; the vector is then normalized.
    """
    if not (math.isfinite(azimuth) and math.isfinite(elevation)):
        raise ValueError("angles must be finite")
    pos = geom.element_positions()
    ky = math.cos(elevation) * math.sin(azimuth)
    kz = math.sin(elevation)
    phase = 2.0 * math.pi * (pos[:, 0] * ky + pos[:, 1] * kz)
    w = np.exp(1j * phase)
    w /= np.linalg.norm(w)
    return SteeringVector(w)


def uniform_codebook(geom: ArrayGeometry, n_dir: int) -> BeamCodebook:
    """Codebook of n_dir beams uniformly spanning azimuth [-pi, pi), elevation 0."""
    if n_dir < 1:
        raise ValueError("n_dir must be >= 1")
    az = -math.pi + 2.0 * math.pi * np.arange(n_dir) / n_dir
    beams = tuple(steering_vector(geom, a, 0.0) for a in az)
    return BeamCodebook(beams=beams, azimuths=az)


def beamforming_gain(
    w_rx: SteeringVector,
    u_rx: SteeringVector,
    w_tx: SteeringVector,
    u_tx: SteeringVector,
) -> float:
    """Combined RX/TX beamforming power gain |w_rx^H u_rx|^2 * |u_tx^H w_tx|^2."""
    if len(w_rx) != len(u_rx) or len(w_tx) != len(u_tx):
        raise ValueError(
            "incompatible array configuration: beam/signature lengths "
            f"rx {len(w_rx)} vs {len(u_rx)}, tx {len(w_tx)} vs {len(u_tx)}"
        )
    rx = np.vdot(w_rx.weights, u_rx.weights)
    tx = np.vdot(u_tx.weights, w_tx.weights)
    return float(abs(rx) ** 2 * abs(tx) ** 2)
