import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from memgrid import DeviceParams, SimConfig, Waveform
from memgrid.experiments import run_uniform_array


REF_PARAMS = DeviceParams(r_on=2e3, r_off=2e5, v_t=0.6, beta=5e5, r_init=2e5)
REF_WAVEFORM = Waveform(amplitude=12.0, frequency=1.0, cycles=5)
REF_CFG = SimConfig(dt=1e-3, record_stride=1, fit_window=0.1)


@pytest.fixture(scope="session")
def ref_params():
    return REF_PARAMS


@pytest.fixture(scope="session")
def ref_waveform():
    return REF_WAVEFORM


@pytest.fixture(scope="session")
def ref_cfg():
    return REF_CFG


@pytest.fixture(scope="session")
def uniform_run():
    """The 4x4 reference run, shared across test modules."""
    return run_uniform_array(4, REF_PARAMS, REF_WAVEFORM, REF_CFG)
