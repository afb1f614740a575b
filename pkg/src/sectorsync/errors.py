"""Exception types shared across the package.

Plain precondition violations (dimension mismatches, bad arguments) raise
ValueError; the classes here mark conditions a caller may want to handle
separately, such as infeasible analytic solves or a blown-up integration.
"""
from __future__ import annotations


class NoStationarySolution(Exception):
    """A chain has no synchronized fixed point (some coupling too weak)."""

    def __init__(self, edge: int, message: str | None = None):
        self.edge = edge
        super().__init__(message or f"no stationary solution: edge {edge}")


class CalibrationInfeasible(Exception):
    """Observed phases cannot be inverted into positive couplings."""

    def __init__(self, pair: int, message: str | None = None):
        self.pair = pair
        super().__init__(
            message or f"calibration infeasible: consecutive pair ({pair}, {pair + 1})"
        )


class NoClearingPrice(Exception):
    """The post-shock demand and supply curves do not intersect."""


class IntegrationDiverged(Exception):
    """The integrator produced a non-finite state."""

    def __init__(self, time: float, message: str | None = None):
        self.time = time
        super().__init__(message or f"integration diverged at t = {time:g}")


class ConfigError(Exception):
    """Scenario configuration could not be parsed or validated."""
