"""Analytic synchronized states of chains, and coupling calibration.

A chain driven by +P at one end and -P at the other has a closed-form fixed
point: walking back from the anchored last oscillator, each consecutive phase
difference is arcsin(P / k) for the connecting coupling k. Inverting the same
relation turns an observed phase profile into the couplings that would hold
it stationary.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import CalibrationInfeasible, NoStationarySolution
from .model import PhaseState, SystemParams, Topology, _edge_sum

__all__ = [
    "StationaryProfile",
    "chain_stationary",
    "calibrate_couplings",
    "stationarity_residual",
]


@dataclass(frozen=True, eq=False)
class StationaryProfile:
    """Equilibrium phases with one oscillator anchored at exactly zero."""

    theta_star: np.ndarray
    anchored: int

    def __post_init__(self):
        theta = np.array(self.theta_star, dtype=float)
        if theta.ndim != 1 or theta.size == 0:
            raise ValueError("theta_star must be a non-empty vector")
        if not np.all(np.isfinite(theta)):
            raise ValueError("theta_star must be finite")
        if not (0 <= self.anchored < theta.size):
            raise ValueError(f"anchored index {self.anchored} out of range")
        if theta[self.anchored] != 0.0:
            raise ValueError("anchored phase must be exactly 0")
        theta.setflags(write=False)
        object.__setattr__(self, "theta_star", theta)

    @property
    def n(self) -> int:
        return int(self.theta_star.size)


def chain_stationary(p: float, couplings, n: int) -> StationaryProfile:
    """Fixed point of a chain with net inputs (+p, 0, ..., 0, -p).

    The last phase is anchored at 0 and each earlier one adds
    arcsin(p / k) over the connecting edge (principal branch, the stable
    equilibrium of the sine coupling). Raises NoStationarySolution, naming
    the first offending edge, when any |p / k| >= 1.
    """
    if n < 2:
        raise ValueError(f"n must be >= 2, got {n}")
    if not math.isfinite(p):
        raise ValueError("p must be finite")
    k = np.asarray(couplings, dtype=float)
    if k.shape != (n - 1,):
        raise ValueError(f"expected {n - 1} couplings for n = {n}, got shape {k.shape}")
    if not np.all(np.isfinite(k)) or np.any(k <= 0.0):
        raise ValueError("couplings must be finite and > 0")

    ratio = p / k
    infeasible = np.flatnonzero(np.abs(ratio) >= 1.0)
    if infeasible.size:
        raise NoStationarySolution(int(infeasible[0]))

    gaps = np.arcsin(ratio)  # gap over edge i: theta[i] - theta[i+1]
    theta = np.zeros(n)
    theta[:-1] = np.cumsum(gaps[::-1])[::-1]
    return StationaryProfile(theta_star=theta, anchored=n - 1)


def calibrate_couplings(theta_star, p: float) -> np.ndarray:
    """Couplings that make an observed phase profile a chain fixed point.

    Each consecutive coupling is p / sin(theta[i] - theta[i+1]). The
    profile is admissible when every such sine has the sign of p, i.e.
    phases strictly decreasing along the chain for p > 0; otherwise raises
    CalibrationInfeasible naming the offending consecutive pair.
    """
    theta = np.asarray(theta_star, dtype=float)
    if theta.ndim != 1 or theta.size < 2:
        raise ValueError("theta_star must be a vector of length >= 2")
    if not np.all(np.isfinite(theta)):
        raise ValueError("theta_star must be finite")
    if p == 0.0 or not math.isfinite(p):
        raise ValueError("p must be finite and nonzero")

    sines = np.sin(theta[:-1] - theta[1:])
    bad = np.flatnonzero(np.sign(sines) != np.sign(p))
    if bad.size:
        raise CalibrationInfeasible(int(bad[0]))
    return p / sines


def stationarity_residual(
    profile: StationaryProfile | np.ndarray, params: SystemParams, topo: Topology
) -> float:
    """Worst-oscillator defect of the zero-velocity fixed-point condition.

    max over i of |P_i + sum_j k_ji sin(theta_j* - theta_i*)|; exactly 0 for
    a true fixed point. Unchanged by a global phase shift, so ``profile``
    may also be a bare (possibly unanchored) phase vector.
    """
    theta = profile.theta_star if isinstance(profile, StationaryProfile) else np.asarray(profile, dtype=float)
    if not (theta.size == params.n == topo.n):
        raise ValueError(
            f"dimension mismatch: profile n={theta.size}, params n={params.n}, topo n={topo.n}"
        )
    residual = params.net_input + _edge_sum(theta, topo)
    return float(np.abs(residual).max())


def state_from_profile(profile: StationaryProfile, t: float = 0.0) -> PhaseState:
    """Rest state positioned at the profile's phases."""
    return PhaseState.at_rest(profile.theta_star, t=t)
