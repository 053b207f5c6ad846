import numpy as np
import pytest

from mmwtrack.arrays import ArrayGeometry, steering_vector
from mmwtrack.blockage import BlockageTrace
from mmwtrack.channel import ChannelState, Path, PathSet, ScenarioConfig


@pytest.fixture
def unit_beam():
    """Single-element beam: couplings reduce to 1."""
    return steering_vector(ArrayGeometry(1, 1), 0.0)


def flat_state(power=1.0, delay_s=0.0, doppler_hz=0.0, h=1.0, beta=1.0,
               n_samples=100, sample_period_s=1e-3, scenario=None):
    """Single-path channel with constant blockage, single-element arrays."""
    sv = steering_vector(ArrayGeometry(1, 1), 0.0)
    sc = scenario or ScenarioConfig()
    path = Path(power=power, delay_s=delay_s, doppler_hz=doppler_hz,
                aoa_azimuth=0.0, aod_azimuth=0.0, sig_rx=sv, sig_tx=sv)
    trace = BlockageTrace(samples=np.full(n_samples, float(h)),
                          sample_period_s=sample_period_s)
    return ChannelState(pathset=PathSet((path,)), blockage=trace,
                        scenario=sc, beta=beta), sv


def two_path_state(p1, p2, tau1, tau2, h=1.0, scenario=None):
    sv = steering_vector(ArrayGeometry(1, 1), 0.0)
    sc = scenario or ScenarioConfig()
    paths = (
        Path(p1, tau1, 0.0, 0.1, 0.2, sv, sv),
        Path(p2, tau2, 0.0, -0.4, 0.9, sv, sv),
    )
    trace = BlockageTrace(samples=np.full(100, float(h)), sample_period_s=1e-3)
    return ChannelState(pathset=PathSet(paths), blockage=trace,
                        scenario=sc, beta=1.0), sv
