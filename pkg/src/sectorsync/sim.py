"""Time integration, trajectory recording, and coherence diagnostics.

The coupled system is advanced with the classical fixed-step fourth-order
Runge-Kutta scheme on the first-order form (theta, theta_dot). Shock onsets
are snapped to step boundaries and the fluctuation ledger is frozen across
the four stages of a step, so runs are exactly reproducible.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence, TextIO

import numpy as np

from .errors import IntegrationDiverged
from .market import MarketParams, ShockEvent, active_fluctuations
from .model import FluctuationLedger, PhaseState, SystemParams, Topology, _edge_sum

__all__ = [
    "Trajectory",
    "ClusterPartition",
    "step_rk4",
    "simulate",
    "order_parameter",
    "detect_clusters",
    "mean_velocity",
    "window_mean_phases",
    "write_trajectory_csv",
]

DEFAULT_DT = 0.01
DEFAULT_DT_RECORD = 0.5
CLUSTER_TOLERANCE = 0.05  # rad/time gap that separates drift clusters
CLUSTER_WINDOW_FRACTION = 0.25  # fraction of the horizon used to fit drifts

# Onsets are compared against step starts with a hair of slack so that an
# onset sitting exactly on a boundary activates at that boundary even when
# k * dt rounds a few ulps past it.
_ONSET_SLACK_STEPS = 1e-9


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Recorded run: uniform sample times, states, and order parameters.

    ``order[s]`` holds (Re q, Im q, r, phi) of the phase centroid at sample
    s. Arrays are immutable once the trajectory is built.
    """

    times: np.ndarray
    thetas: np.ndarray
    theta_dots: np.ndarray
    order: np.ndarray

    def __post_init__(self):
        times = np.array(self.times, dtype=float)
        thetas = np.array(self.thetas, dtype=float)
        theta_dots = np.array(self.theta_dots, dtype=float)
        order = np.array(self.order, dtype=float)
        m = times.size
        if m == 0 or thetas.shape[0] != m or theta_dots.shape[0] != m or order.shape != (m, 4):
            raise ValueError("trajectory arrays must share the sample dimension")
        if m > 1:
            steps = np.diff(times)
            if np.any(steps <= 0.0):
                raise ValueError("sample times must be strictly increasing")
            dt = steps[0]
            if np.any(np.abs(steps - dt) > 1e-12 * max(abs(times[-1]), 1.0)):
                raise ValueError("sample times must be uniformly spaced")
        re, im, r, phi = order.T
        if np.any(r < 0.0) or np.any(r > 1.0 + 1e-12):
            raise ValueError("order parameter radius out of [0, 1]")
        if np.any(np.abs(r * r - (re * re + im * im)) > 1e-12):
            raise ValueError("order parameter radius inconsistent with components")
        for arr in (times, thetas, theta_dots, order):
            arr.setflags(write=False)
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "thetas", thetas)
        object.__setattr__(self, "theta_dots", theta_dots)
        object.__setattr__(self, "order", order)

    @property
    def n(self) -> int:
        return int(self.thetas.shape[1])

    @property
    def n_samples(self) -> int:
        return int(self.times.size)

    def state(self, sample: int) -> PhaseState:
        return PhaseState(
            t=float(self.times[sample]),
            theta=self.thetas[sample],
            theta_dot=self.theta_dots[sample],
        )

    @property
    def r(self) -> np.ndarray:
        return self.order[:, 2]


@dataclass(frozen=True, eq=False)
class ClusterPartition:
    """Grouping of oscillators by asymptotic drift rate."""

    assignment: np.ndarray
    drift_rates: np.ndarray

    def __post_init__(self):
        assignment = np.array(self.assignment, dtype=int)
        drift = np.array(self.drift_rates, dtype=float)
        labels = np.unique(assignment)
        if assignment.size == 0 or not np.array_equal(labels, np.arange(labels.size)):
            raise ValueError("labels must be contiguous from 0")
        if drift.shape != (labels.size,):
            raise ValueError("one drift rate per cluster required")
        assignment.setflags(write=False)
        drift.setflags(write=False)
        object.__setattr__(self, "assignment", assignment)
        object.__setattr__(self, "drift_rates", drift)

    @property
    def n_clusters(self) -> int:
        return int(self.drift_rates.size)

    def members(self, label: int) -> np.ndarray:
        return np.flatnonzero(self.assignment == label)


def order_parameter(theta) -> tuple[float, float, float, float]:
    """Phase centroid q = mean(exp(i * theta)): (Re q, Im q, r, phi)."""
    theta = np.asarray(theta, dtype=float)
    if theta.ndim != 1 or theta.size < 1:
        raise ValueError("theta must be a non-empty vector")
    q = np.exp(1j * theta).mean()
    return float(q.real), float(q.imag), float(abs(q)), float(np.arctan2(q.imag, q.real))


def _rhs(
    theta: np.ndarray,
    theta_dot: np.ndarray,
    params: SystemParams,
    topo: Topology,
    delta: np.ndarray,
) -> tuple[np.ndarray, np.ndarray]:
    acc = params.net_input - params.alpha * theta_dot + _edge_sum(theta, topo)
    if delta is not None:
        acc = acc + delta
    return theta_dot, acc


def _rk4_raw(
    theta: np.ndarray,
    theta_dot: np.ndarray,
    dt: float,
    params: SystemParams,
    topo: Topology,
    delta: np.ndarray,
) -> tuple[np.ndarray, np.ndarray]:
    k1t, k1v = _rhs(theta, theta_dot, params, topo, delta)
    k2t, k2v = _rhs(theta + 0.5 * dt * k1t, theta_dot + 0.5 * dt * k1v, params, topo, delta)
    k3t, k3v = _rhs(theta + 0.5 * dt * k2t, theta_dot + 0.5 * dt * k2v, params, topo, delta)
    k4t, k4v = _rhs(theta + dt * k3t, theta_dot + dt * k3v, params, topo, delta)
    new_theta = theta + (dt / 6.0) * (k1t + 2.0 * k2t + 2.0 * k3t + k4t)
    new_dot = theta_dot + (dt / 6.0) * (k1v + 2.0 * k2v + 2.0 * k3v + k4v)
    return new_theta, new_dot


def step_rk4(
    state: PhaseState,
    dt: float,
    params: SystemParams,
    topo: Topology,
    fluct: FluctuationLedger | None = None,
) -> PhaseState:
    """One classical RK4 step; the fluctuation ledger is held fixed."""
    if not (dt > 0.0 and math.isfinite(dt)):
        raise ValueError(f"dt must be > 0, got {dt}")
    if not (state.n == params.n == topo.n):
        raise ValueError(
            f"dimension mismatch: state n={state.n}, params n={params.n}, topo n={topo.n}"
        )
    delta = fluct.per_node_sum(topo) if (fluct is not None and fluct) else None
    theta, theta_dot = _rk4_raw(state.theta, state.theta_dot, dt, params, topo, delta)
    t_next = state.t + dt
    if not (np.all(np.isfinite(theta)) and np.all(np.isfinite(theta_dot))):
        raise IntegrationDiverged(t_next)
    return PhaseState(t=t_next, theta=theta, theta_dot=theta_dot)


def simulate(
    initial: PhaseState,
    params: SystemParams,
    topo: Topology,
    horizon: float,
    *,
    dt: float = DEFAULT_DT,
    dt_record: float = DEFAULT_DT_RECORD,
    shocks: Sequence[ShockEvent] = (),
    market: MarketParams | None = None,
) -> Trajectory:
    """Integrate from the initial state over ``horizon`` time units.

    The fluctuation ledger is rebuilt from the shock list at every step
    using the step's start time, snapshots are recorded every ``dt_record``
    (which must be an integer multiple of ``dt``, as must the horizon be of
    ``dt_record``), and the phase centroid is recorded per sample.
    """
    if not (initial.n == params.n == topo.n):
        raise ValueError(
            f"dimension mismatch: initial n={initial.n}, params n={params.n}, topo n={topo.n}"
        )
    if not (horizon > 0.0 and math.isfinite(horizon)):
        raise ValueError(f"horizon must be > 0, got {horizon}")
    if not (0.0 < dt <= dt_record):
        raise ValueError(f"need 0 < dt <= dt_record, got dt={dt}, dt_record={dt_record}")
    record_every = int(round(dt_record / dt))
    if abs(record_every * dt - dt_record) > 1e-9 * dt_record:
        raise ValueError(f"dt_record={dt_record} is not an integer multiple of dt={dt}")
    n_records = int(round(horizon / dt_record))
    if n_records < 1 or abs(n_records * dt_record - horizon) > 1e-9 * horizon:
        raise ValueError(f"horizon={horizon} is not an integer multiple of dt_record={dt_record}")
    if shocks and market is None:
        raise ValueError("market params are required when shocks are present")
    seen: set[tuple[int, int]] = set()
    for shock in shocks:
        if shock.edge in seen:
            raise ValueError(f"two shocks on the same directed pair {shock.edge}")
        seen.add(shock.edge)
        if not topo.has_edge(*shock.edge):
            raise ValueError(f"shock pair {shock.edge} is not an edge of the topology")

    total_steps = n_records * record_every
    theta = initial.theta.copy()
    theta_dot = initial.theta_dot.copy()
    t0 = initial.t

    times = t0 + np.arange(n_records + 1) * dt_record
    thetas = np.empty((n_records + 1, topo.n))
    theta_dots = np.empty((n_records + 1, topo.n))

    sample = 0
    for k in range(total_steps + 1):
        if k % record_every == 0:
            thetas[sample] = theta
            theta_dots[sample] = theta_dot
            sample += 1
        if k == total_steps:
            break
        t_step = t0 + k * dt
        if shocks:
            ledger = active_fluctuations(shocks, t_step + _ONSET_SLACK_STEPS * dt, market)
            delta = ledger.per_node_sum(topo) if ledger else None
        else:
            delta = None
        theta, theta_dot = _rk4_raw(theta, theta_dot, dt, params, topo, delta)
        if not (np.all(np.isfinite(theta)) and np.all(np.isfinite(theta_dot))):
            raise IntegrationDiverged(
                t0 + (k + 1) * dt,
                f"integration diverged at t = {t0 + (k + 1) * dt:g} "
                f"(step {k + 1} of {total_steps})",
            )

    q = np.exp(1j * thetas).mean(axis=1)
    order = np.column_stack(
        [q.real, q.imag, np.abs(q), np.arctan2(q.imag, q.real)]
    )
    return Trajectory(times=times, thetas=thetas, theta_dots=theta_dots, order=order)


def mean_velocity(traj: Trajectory) -> np.ndarray:
    """Average phase velocity across oscillators, per sample."""
    return traj.theta_dots.mean(axis=1)


def _window_mask(traj: Trajectory, window: float) -> np.ndarray:
    times = traj.times
    span = times[-1] - times[0]
    if not (0.0 < window < span):
        raise ValueError(f"window must lie in (0, {span}), got {window}")
    return times >= times[-1] - window - 1e-12 * max(span, 1.0)


def window_mean_phases(traj: Trajectory, window: float) -> np.ndarray:
    """Per-oscillator time-averaged phase over the final window."""
    mask = _window_mask(traj, window)
    return traj.thetas[mask].mean(axis=0)


def detect_clusters(traj: Trajectory, window: float, tolerance: float = CLUSTER_TOLERANCE) -> ClusterPartition:
    """Group oscillators by asymptotic drift rate.

    Drift is the least-squares slope of each phase over the final window;
    sorted slopes are merged single-linkage style wherever the gap between
    neighbours stays below the tolerance. Labels follow first appearance in
    oscillator order.
    """
    if tolerance <= 0.0:
        raise ValueError(f"tolerance must be > 0, got {tolerance}")
    mask = _window_mask(traj, window)
    if int(mask.sum()) < 3:
        raise ValueError("window must cover at least 3 samples")
    t = traj.times[mask]
    th = traj.thetas[mask]
    tc = t - t.mean()
    slopes = tc @ (th - th.mean(axis=0)) / (tc @ tc)

    order = np.argsort(slopes, kind="stable")
    group_of_sorted = np.zeros(traj.n, dtype=int)
    group = 0
    for pos in range(1, traj.n):
        if slopes[order[pos]] - slopes[order[pos - 1]] >= tolerance:
            group += 1
        group_of_sorted[pos] = group
    groups = np.empty(traj.n, dtype=int)
    groups[order] = group_of_sorted

    # relabel by first appearance so labels are deterministic in oscillator order
    relabel: dict[int, int] = {}
    assignment = np.empty(traj.n, dtype=int)
    for osc in range(traj.n):
        g = int(groups[osc])
        if g not in relabel:
            relabel[g] = len(relabel)
        assignment[osc] = relabel[g]
    drift = np.array(
        [slopes[assignment == label].mean() for label in range(len(relabel))]
    )
    return ClusterPartition(assignment=assignment, drift_rates=drift)


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def write_trajectory_csv(traj: Trajectory, stream: TextIO) -> None:
    """Write the recorded run with full double precision.

    Header: t, per-oscillator phases, per-oscillator velocities, then the
    order parameter columns re_q, im_q, r, phi.
    """
    n = traj.n
    header = (
        ["t"]
        + [f"theta_{i}" for i in range(n)]
        + [f"thetadot_{i}" for i in range(n)]
        + ["re_q", "im_q", "r", "phi"]
    )
    stream.write(",".join(header) + "\n")
    for s in range(traj.n_samples):
        row = (
            [_fmt(traj.times[s])]
            + [_fmt(v) for v in traj.thetas[s]]
            + [_fmt(v) for v in traj.theta_dots[s]]
            + [_fmt(v) for v in traj.order[s]]
        )
        stream.write(",".join(row) + "\n")
