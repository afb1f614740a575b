from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sectorsync import (
    FluctuationLedger,
    PhaseState,
    SystemParams,
    Topology,
    acceleration,
    growth_rate,
    chain_stationary,
)


def brute_force_acceleration(state, params, topo, fluct=None):
    """Independent term-by-term oracle for the equations of motion."""
    fluct = fluct or FluctuationLedger.empty()
    out = []
    for i in range(params.n):
        total = params.net_input[i] - params.alpha * state.theta_dot[i]
        for j, k in topo.neighbors(i):
            total += k * math.sin(state.theta[j] - state.theta[i])
            total += fluct.amount(j, i)
        out.append(total)
    return np.array(out)


class TestSystemParams:
    def test_omega_matches_period(self):
        params = SystemParams.endpoints(4, 1.0, alpha=1.0, period=60.0)
        assert params.omega == pytest.approx(2.0 * math.pi / 60.0, abs=0.0)

    def test_endpoints_pattern(self):
        params = SystemParams.endpoints(5, 2.5, alpha=0.0, period=10.0)
        assert params.net_input.tolist() == [2.5, 0.0, 0.0, 0.0, -2.5]

    @pytest.mark.parametrize(
        "kwargs",
        [
            dict(n=1, net_input=[1.0], alpha=1.0, period=60.0),
            dict(n=2, net_input=[1.0, -1.0], alpha=-0.1, period=60.0),
            dict(n=2, net_input=[1.0, -1.0], alpha=1.0, period=0.0),
            dict(n=2, net_input=[1.0], alpha=1.0, period=60.0),
            dict(n=2, net_input=[np.nan, 0.0], alpha=1.0, period=60.0),
        ],
    )
    def test_rejects_invalid(self, kwargs):
        with pytest.raises(ValueError):
            SystemParams(**kwargs)


class TestTopology:
    def test_chain_has_n_minus_1_edges(self):
        topo = Topology.chain(6, np.full(5, 2.0))
        assert topo.n_edges == 5
        assert list(topo.edges()) == [(i, i + 1, 2.0) for i in range(5)]

    def test_complete_graph_edge_count(self):
        # 6 oscillators trade pairwise through (6*5)/2 = 15 markets
        topo = Topology.complete(6, 1.5)
        assert topo.n_edges == 15
        assert topo.coupling_of(5, 0) == 1.5

    def test_symmetric_lookup(self):
        topo = Topology.from_edges(4, [(2, 0, 3.0), (1, 2, 0.5)])
        assert topo.coupling_of(0, 2) == topo.coupling_of(2, 0) == 3.0
        assert topo.has_edge(2, 1) and not topo.has_edge(0, 1)
        with pytest.raises(ValueError):
            topo.coupling_of(0, 3)

    def test_rejects_self_loop_and_duplicates(self):
        with pytest.raises(ValueError):
            Topology.from_edges(3, [(1, 1, 2.0)])
        with pytest.raises(ValueError):
            Topology.from_edges(3, [(0, 1, 2.0), (1, 0, 3.0)])

    def test_rejects_nonpositive_coupling(self):
        with pytest.raises(ValueError):
            Topology.chain(3, [2.0, 0.0])

    def test_scaled(self):
        topo = Topology.chain(3, [2.0, 4.0]).scaled(0.5)
        assert topo.coupling.tolist() == [1.0, 2.0]

    def test_neighbors(self):
        topo = Topology.chain(4, [1.0, 2.0, 3.0])
        assert topo.neighbors(0) == [(1, 1.0)]
        assert topo.neighbors(2) == [(1, 2.0), (3, 3.0)]


class TestPhaseState:
    def test_rejects_nonfinite(self):
        with pytest.raises(ValueError):
            PhaseState(t=0.0, theta=[0.0, np.inf], theta_dot=[0.0, 0.0])

    def test_rejects_length_mismatch(self):
        with pytest.raises(ValueError):
            PhaseState(t=0.0, theta=[0.0, 1.0], theta_dot=[0.0])

    def test_at_rest(self):
        state = PhaseState.at_rest([0.3, -0.3])
        assert state.t == 0.0
        assert state.theta_dot.tolist() == [0.0, 0.0]


class TestAcceleration:
    def test_two_oscillators_zero_phases(self):
        # sin 0 = 0, so only the net inputs survive
        state = PhaseState.at_rest(np.zeros(2))
        params = SystemParams(n=2, net_input=[1.0, -1.0], alpha=1.0, period=60.0)
        topo = Topology.chain(2, [3.0])
        assert acceleration(state, params, topo).tolist() == [1.0, -1.0]

    def test_quarter_turn_undamped(self):
        state = PhaseState.at_rest(np.array([0.0, math.pi / 2]))
        params = SystemParams(n=2, net_input=[0.0, 0.0], alpha=0.0, period=60.0)
        topo = Topology.chain(2, [1.0])
        acc = acceleration(state, params, topo)
        assert acc == pytest.approx([1.0, -1.0], abs=1e-15)

    def test_stationary_profile_is_fixed_point(self, small_chain):
        params, topo = small_chain
        profile = chain_stationary(1.0, [2.0, 2.0], 3)
        state = PhaseState.at_rest(profile.theta_star)
        assert np.abs(acceleration(state, params, topo)).max() < 1e-12

    def test_matches_brute_force_oracle(self):
        rng = np.random.default_rng(7)
        for _ in range(50):
            state = PhaseState(
                t=0.0,
                theta=rng.uniform(-math.pi, math.pi, 3),
                theta_dot=rng.uniform(-1, 1, 3),
            )
            params = SystemParams(
                n=3, net_input=rng.uniform(-2, 2, 3), alpha=rng.uniform(0, 2), period=60.0
            )
            topo = Topology.chain(3, rng.uniform(0.5, 5.0, 2))
            expected = brute_force_acceleration(state, params, topo)
            assert np.abs(acceleration(state, params, topo) - expected).max() < 1e-14

    def test_matches_brute_force_on_complete_graph_with_fluctuations(self):
        rng = np.random.default_rng(11)
        topo = Topology.complete(5, 1.3)
        params = SystemParams(n=5, net_input=rng.uniform(-1, 1, 5), alpha=0.7, period=60.0)
        state = PhaseState(t=0.0, theta=rng.uniform(-3, 3, 5), theta_dot=rng.uniform(-1, 1, 5))
        fluct = FluctuationLedger({(2, 4): 0.5, (4, 2): -0.5, (0, 1): 0.25})
        expected = brute_force_acceleration(state, params, topo, fluct)
        assert np.abs(acceleration(state, params, topo, fluct) - expected).max() < 1e-14

    def test_fluctuation_sign_and_placement(self):
        state = PhaseState.at_rest(np.zeros(2))
        params = SystemParams(n=2, net_input=[0.0, 0.0], alpha=1.0, period=60.0)
        topo = Topology.chain(2, [1.0])
        acc = acceleration(state, params, topo, FluctuationLedger({(1, 0): -0.25}))
        assert acc.tolist() == [-0.25, 0.0]

    def test_off_edge_fluctuation_rejected(self):
        state = PhaseState.at_rest(np.zeros(3))
        params = SystemParams.endpoints(3, 1.0, alpha=1.0, period=60.0)
        topo = Topology.chain(3, [2.0, 2.0])
        with pytest.raises(ValueError, match="not an edge"):
            acceleration(state, params, topo, FluctuationLedger({(0, 2): 0.1}))

    def test_dimension_mismatch(self):
        state = PhaseState.at_rest(np.zeros(3))
        params = SystemParams(n=2, net_input=[1.0, -1.0], alpha=1.0, period=60.0)
        topo = Topology.chain(2, [1.0])
        with pytest.raises(ValueError, match="dimension mismatch"):
            acceleration(state, params, topo)

    def test_pure_function_bitwise(self):
        state = PhaseState(t=1.0, theta=[0.4, -0.2, 1.1], theta_dot=[0.1, 0.0, -0.3])
        params = SystemParams.endpoints(3, 1.0, alpha=0.8, period=60.0)
        topo = Topology.chain(3, [2.0, 3.0])
        first = acceleration(state, params, topo)
        second = acceleration(state, params, topo)
        assert np.array_equal(first, second)


@settings(max_examples=60, deadline=None)
@given(data=st.data())
def test_coupling_terms_cancel_in_the_sum(data):
    """Every edge contributes equal and opposite terms, so the summed
    accelerations reduce to sum(P) - alpha * sum(theta_dot) up to rounding."""
    n = data.draw(st.integers(2, 8))
    finite = st.floats(-3.0, 3.0, allow_nan=False)
    theta = np.array(data.draw(st.lists(finite, min_size=n, max_size=n)))
    theta_dot = np.array(data.draw(st.lists(finite, min_size=n, max_size=n)))
    net = np.array(data.draw(st.lists(finite, min_size=n, max_size=n)))
    alpha = data.draw(st.floats(0.0, 2.0))
    params = SystemParams(n=n, net_input=net, alpha=alpha, period=60.0)
    topo = Topology.complete(n, 2.0)
    acc = acceleration(PhaseState(t=0.0, theta=theta, theta_dot=theta_dot), params, topo)
    lhs = acc.sum()
    rhs = net.sum() - alpha * theta_dot.sum()
    scale = np.abs(acc).sum() + np.abs(net).sum() + alpha * np.abs(theta_dot).sum() + 1.0
    assert abs(lhs - rhs) < 1e-12 * scale


@settings(max_examples=60, deadline=None)
@given(
    shift=st.floats(-50.0, 50.0, allow_nan=False),
    seed=st.integers(0, 2**16),
)
def test_translation_invariance(shift, seed):
    rng = np.random.default_rng(seed)
    n = 5
    theta = rng.uniform(-math.pi, math.pi, n)
    theta_dot = rng.uniform(-1, 1, n)
    params = SystemParams.endpoints(n, 1.0, alpha=1.0, period=60.0)
    topo = Topology.chain(n, rng.uniform(0.5, 4.0, n - 1))
    base = acceleration(PhaseState(t=0.0, theta=theta, theta_dot=theta_dot), params, topo)
    moved = acceleration(
        PhaseState(t=0.0, theta=theta + shift, theta_dot=theta_dot), params, topo
    )
    assert np.abs(base - moved).max() < 1e-9


class TestGrowthRate:
    def test_zero_phase_zero_time(self):
        state = PhaseState.at_rest(np.zeros(2))
        params = SystemParams(n=2, net_input=[1.0, -1.0], alpha=1.0, period=60.0)
        assert growth_rate(state, params, 0.0).tolist() == [0.0, 0.0]

    def test_quarter_phase(self):
        state = PhaseState.at_rest(np.array([math.pi / 2, math.pi / 2]))
        params = SystemParams(n=2, net_input=[1.0, -1.0], alpha=1.0, period=60.0)
        assert growth_rate(state, params, 0.0) == pytest.approx([1.0, 1.0])

    def test_quarter_period(self):
        # omega * t = pi/2 fifteen time units into a 60-unit cycle
        state = PhaseState.at_rest(np.array([0.0, math.pi / 6]))
        params = SystemParams(n=2, net_input=[1.0, -1.0], alpha=1.0, period=60.0)
        x = growth_rate(state, params, 15.0)
        assert x == pytest.approx([1.0, math.cos(math.pi / 6)])

    def test_dimension_check(self):
        state = PhaseState.at_rest(np.zeros(3))
        params = SystemParams(n=2, net_input=[1.0, -1.0], alpha=1.0, period=60.0)
        with pytest.raises(ValueError):
            growth_rate(state, params, 0.0)


class TestFluctuationLedger:
    def test_absent_pairs_are_zero(self):
        ledger = FluctuationLedger({(1, 0): 0.5})
        assert ledger.amount(1, 0) == 0.5
        assert ledger.amount(0, 1) == 0.0

    def test_rejects_self_pair_and_nonfinite(self):
        with pytest.raises(ValueError):
            FluctuationLedger({(2, 2): 0.1})
        with pytest.raises(ValueError):
            FluctuationLedger({(0, 1): math.inf})

    def test_per_node_sum(self):
        topo = Topology.chain(3, [1.0, 1.0])
        ledger = FluctuationLedger({(0, 1): 0.2, (2, 1): 0.3, (1, 0): -0.1})
        assert ledger.per_node_sum(topo) == pytest.approx([-0.1, 0.5, 0.0])
