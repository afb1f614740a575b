"""Networks of inertial sector oscillators coupled through goods markets.

The library models each economic sector as a phase oscillator with inertia
whose cycle is synchronized to its trading partners by the goods flowing
between them. It provides the equations of motion, analytic synchronized
states of chains with coupling calibration from observed phases, a per-edge
market layer with elasticity-dependent shock absorption, a reproducible
fixed-step integrator with coherence diagnostics, and a CLI that renders
delimited outputs and figures for bundled scenarios.
"""
from .errors import (
    CalibrationInfeasible,
    ConfigError,
    IntegrationDiverged,
    NoClearingPrice,
    NoStationarySolution,
)
from .market import (
    EdgeMarket,
    MarketParams,
    ShockEvent,
    active_fluctuations,
    clear_price,
    demand_response,
    equilibrated_volume,
)
from .model import (
    FluctuationLedger,
    PhaseState,
    SystemParams,
    Topology,
    acceleration,
    growth_rate,
)
from .sim import (
    ClusterPartition,
    Trajectory,
    detect_clusters,
    mean_velocity,
    order_parameter,
    simulate,
    step_rk4,
    window_mean_phases,
    write_trajectory_csv,
)
from .stationary import (
    StationaryProfile,
    calibrate_couplings,
    chain_stationary,
    stationarity_residual,
)

__version__ = "0.1.0"

__all__ = [
    "CalibrationInfeasible",
    "ClusterPartition",
    "ConfigError",
    "EdgeMarket",
    "FluctuationLedger",
    "IntegrationDiverged",
    "MarketParams",
    "NoClearingPrice",
    "NoStationarySolution",
    "PhaseState",
    "ShockEvent",
    "StationaryProfile",
    "SystemParams",
    "Topology",
    "Trajectory",
    "acceleration",
    "active_fluctuations",
    "calibrate_couplings",
    "chain_stationary",
    "clear_price",
    "demand_response",
    "detect_clusters",
    "equilibrated_volume",
    "growth_rate",
    "mean_velocity",
    "order_parameter",
    "simulate",
    "stationarity_residual",
    "step_rk4",
    "window_mean_phases",
    "write_trajectory_csv",
]
