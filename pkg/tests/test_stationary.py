from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sectorsync import (
    CalibrationInfeasible,
    NoStationarySolution,
    StationaryProfile,
    SystemParams,
    Topology,
    calibrate_couplings,
    chain_stationary,
    stationarity_residual,
)


def residual_oracle(theta: np.ndarray, net_input: np.ndarray, couplings: np.ndarray) -> float:
    """Independent fixed-point defect: explicit per-oscillator edge sums."""
    n = theta.size
    worst = 0.0
    for i in range(n):
        total = net_input[i]
        if i > 0:
            total += couplings[i - 1] * math.sin(theta[i - 1] - theta[i])
        if i < n - 1:
            total += couplings[i] * math.sin(theta[i + 1] - theta[i])
        worst = max(worst, abs(total))
    return worst


def endpoint_net(n: int, p: float) -> np.ndarray:
    net = np.zeros(n)
    net[0], net[-1] = p, -p
    return net


class TestChainStationary:
    def test_arcsin_half(self):
        profile = chain_stationary(1.0, [2.0, 2.0], 3)
        assert profile.theta_star == pytest.approx([math.pi / 3, math.pi / 6, 0.0], abs=1e-15)
        assert profile.anchored == 2

    def test_zero_drive_is_flat(self):
        profile = chain_stationary(0.0, [0.7, 1.3, 9.0], 4)
        assert profile.theta_star.tolist() == [0.0, 0.0, 0.0, 0.0]

    def test_uneven_couplings_fixed_point_residual(self):
        couplings = np.array([1.1, 5.0, 1.1])
        profile = chain_stationary(1.0, couplings, 4)
        assert residual_oracle(profile.theta_star, endpoint_net(4, 1.0), couplings) < 1e-10

    def test_weak_edge_has_no_solution(self):
        with pytest.raises(NoStationarySolution) as err:
            chain_stationary(1.0, [0.9, 2.0], 3)
        assert err.value.edge == 0
        assert "edge 0" in str(err.value)

    def test_boundary_coupling_has_no_solution(self):
        with pytest.raises(NoStationarySolution):
            chain_stationary(1.0, [1.0, 2.0], 3)

    def test_negative_drive_mirrors(self):
        plus = chain_stationary(1.0, [2.0, 3.0], 3)
        minus = chain_stationary(-1.0, [2.0, 3.0], 3)
        assert minus.theta_star == pytest.approx(-plus.theta_star, abs=0.0)

    def test_rejects_bad_arguments(self):
        with pytest.raises(ValueError):
            chain_stationary(1.0, [2.0], 1)
        with pytest.raises(ValueError):
            chain_stationary(1.0, [2.0, 2.0], 4)
        with pytest.raises(ValueError):
            chain_stationary(1.0, [2.0, -2.0, 2.0], 4)


class TestCalibration:
    def test_half_sine(self):
        k = calibrate_couplings([math.pi / 6, 0.0], 1.0)
        assert k == pytest.approx([2.0])

    def test_unit_sine(self):
        k = calibrate_couplings([math.pi / 2, 0.0], 1.0)
        assert k == pytest.approx([1.0])

    def test_synthetic_21_sector_round_trip(self):
        rng = np.random.default_rng(2024)
        gaps = rng.uniform(0.02, 0.12, 20)
        theta = np.concatenate([[0.0], -np.cumsum(gaps)]) + 0.4
        k = calibrate_couplings(theta, 1.0)
        rebuilt = chain_stationary(1.0, k, 21).theta_star
        assert np.abs(rebuilt - (theta - theta[-1])).max() < 1e-12

    def test_non_monotonic_is_infeasible(self):
        with pytest.raises(CalibrationInfeasible) as err:
            calibrate_couplings([0.1, 0.4, 0.0], 1.0)
        assert err.value.pair == 0

    def test_zero_difference_is_infeasible(self):
        with pytest.raises(CalibrationInfeasible):
            calibrate_couplings([0.4, 0.4, 0.0], 1.0)

    def test_zero_drive_rejected(self):
        with pytest.raises(ValueError):
            calibrate_couplings([0.4, 0.2, 0.0], 0.0)


@settings(max_examples=80, deadline=None)
@given(
    gaps=st.lists(st.floats(0.01, 1.55), min_size=1, max_size=30),
    p=st.floats(0.1, 10.0),
)
def test_round_trip_identity_on_phase_differences(gaps, p):
    """calibrate then rebuild recovers every phase difference; the principal
    arcsin branch inverts sines of gaps below pi/2."""
    theta = np.concatenate([[0.0], -np.cumsum(gaps)])
    n = theta.size
    k = calibrate_couplings(theta, p)
    rebuilt = chain_stationary(p, k, n).theta_star
    assert np.abs(np.diff(rebuilt) - np.diff(theta)).max() < 1e-12


@settings(max_examples=60, deadline=None)
@given(
    k_small=st.floats(1.1, 50.0),
    factor=st.floats(1.01, 10.0),
    p=st.floats(0.1, 1.0),
)
def test_stronger_coupling_gives_smaller_gap(k_small, factor, p):
    lo = chain_stationary(p, [k_small], 2).theta_star
    hi = chain_stationary(p, [k_small * factor], 2).theta_star
    assert hi[0] < lo[0]


class TestStationarityResidual:
    def test_constructed_profile_is_fixed_point(self):
        couplings = np.array([1.4, 2.0, 7.5, 1.2])
        profile = chain_stationary(1.0, couplings, 5)
        params = SystemParams.endpoints(5, 1.0, alpha=1.0, period=60.0)
        topo = Topology.chain(5, couplings)
        assert stationarity_residual(profile, params, topo) < 1e-10

    def test_flat_profile_with_endpoint_drive(self):
        profile = StationaryProfile(theta_star=np.zeros(2), anchored=1)
        params = SystemParams(n=2, net_input=[1.0, -1.0], alpha=1.0, period=60.0)
        topo = Topology.chain(2, [5.0])
        assert stationarity_residual(profile, params, topo) == 1.0

    def test_perturbation_breaks_fixed_point(self):
        couplings = np.array([2.0, 2.0, 2.0])
        profile = chain_stationary(1.0, couplings, 4)
        params = SystemParams.endpoints(4, 1.0, alpha=1.0, period=60.0)
        topo = Topology.chain(4, couplings)
        bumped = profile.theta_star.copy()
        bumped[1] += 0.01
        assert stationarity_residual(bumped, params, topo) > 1e-3

    def test_anchor_invariance(self):
        couplings = np.array([1.7, 3.0])
        params = SystemParams.endpoints(3, 1.0, alpha=1.0, period=60.0)
        topo = Topology.chain(3, couplings)
        theta = chain_stationary(1.0, couplings, 3).theta_star + 0.005
        base = stationarity_residual(theta, params, topo)
        shifted = stationarity_residual(theta + 123.456, params, topo)
        assert shifted == pytest.approx(base, abs=1e-12)


class TestStationaryProfile:
    def test_requires_exact_zero_anchor(self):
        with pytest.raises(ValueError):
            StationaryProfile(theta_star=np.array([0.5, 1e-300]), anchored=1)

    def test_rejects_nonfinite(self):
        with pytest.raises(ValueError):
            StationaryProfile(theta_star=np.array([np.nan, 0.0]), anchored=1)
