from __future__ import annotations

import numpy as np
import pytest

from sectorsync import SystemParams, Topology, calibrate_couplings
from sectorsync.config import read_phases_csv
from sectorsync.scenarios import path as scenario_path


@pytest.fixture(scope="session")
def observed_phases() -> np.ndarray:
    return read_phases_csv(scenario_path("shock_elastic").parent / "observed_phases_21.csv")


@pytest.fixture(scope="session")
def calibrated_chain(observed_phases):
    """The bundled 21-sector chain: (params, topology, couplings, observed)."""
    couplings = calibrate_couplings(observed_phases, 1.0)
    params = SystemParams.endpoints(21, 1.0, alpha=0.5, period=60.0)
    topo = Topology.chain(21, couplings)
    return params, topo, couplings, observed_phases


@pytest.fixture
def small_chain():
    """3-oscillator chain with comfortable couplings."""
    params = SystemParams.endpoints(3, 1.0, alpha=1.0, period=60.0)
    topo = Topology.chain(3, [2.0, 2.0])
    return params, topo
