"""Per-edge goods markets: clearing volumes, elasticity response, shocks.

Each edge of the coupling graph carries a market whose equilibrated volume
equals the transmitted power at the synchronized state. A supply fluctuation
on a directed pair either gets absorbed by the partner lowering demand by the
same amount (elastic demand) or passes through unbalanced (rigid demand).
The clearing price solves power-law demand and supply curves meeting after a
vertical shift of supply.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from .errors import NoClearingPrice
from .model import FluctuationLedger

__all__ = [
    "MarketParams",
    "EdgeMarket",
    "ShockEvent",
    "equilibrated_volume",
    "demand_response",
    "clear_price",
    "active_fluctuations",
]

_BISECTION_REL_TOL = 1e-10


@dataclass(frozen=True)
class MarketParams:
    """Price elasticities and the reference price shared by all markets."""

    epsilon_d: float
    epsilon_s: float
    p0: float = 1.0

    def __post_init__(self):
        if not (math.isfinite(self.epsilon_d) and self.epsilon_d <= 0.0):
            raise ValueError(f"epsilon_d must be <= 0, got {self.epsilon_d}")
        if not (math.isfinite(self.epsilon_s) and self.epsilon_s >= 0.0):
            raise ValueError(f"epsilon_s must be >= 0, got {self.epsilon_s}")
        if not (math.isfinite(self.p0) and self.p0 > 0.0):
            raise ValueError(f"p0 must be > 0, got {self.p0}")


@dataclass(frozen=True)
class EdgeMarket:
    """One goods market sitting on an undirected edge.

    Demand and supply are equilibrated (d0 == s0) at the synchronized
    state; the common value is the absolute transmitted power there.
    """

    edge: tuple[int, int]
    d0: float
    s0: float
    params: MarketParams

    def __post_init__(self):
        a, b = self.edge
        if a == b:
            raise ValueError("market edge cannot be a self-loop")
        if not (math.isfinite(self.d0) and self.d0 >= 0.0):
            raise ValueError(f"d0 must be >= 0, got {self.d0}")
        if self.d0 != self.s0:
            raise ValueError(f"market must be equilibrated: d0={self.d0} != s0={self.s0}")

    @classmethod
    def from_equilibrium(
        cls,
        edge: tuple[int, int],
        k: float,
        theta_i_star: float,
        theta_j_star: float,
        params: MarketParams,
    ) -> "EdgeMarket":
        volume = equilibrated_volume(k, theta_i_star, theta_j_star)
        return cls(edge=edge, d0=volume, s0=volume, params=params)


@dataclass(frozen=True)
class ShockEvent:
    """Persistent step fluctuation on a directed pair, active from onset on.

    ``edge = (j, i)`` adds ``magnitude`` to oscillator i's equation; the
    market response (if any) enters oscillator j's equation.
    """

    edge: tuple[int, int]
    magnitude: float
    onset: float

    def __post_init__(self):
        j, i = self.edge
        if j == i:
            raise ValueError("shock edge cannot be a self-loop")
        object.__setattr__(self, "edge", (int(j), int(i)))
        if not math.isfinite(self.magnitude):
            raise ValueError("shock magnitude must be finite")
        if not (math.isfinite(self.onset) and self.onset >= 0.0):
            raise ValueError(f"shock onset must be >= 0, got {self.onset}")


def equilibrated_volume(k: float, theta_i_star: float, theta_j_star: float) -> float:
    """Market-clearing quantity k * |sin(theta_j* - theta_i*)| at equilibrium."""
    if not (k > 0.0 and math.isfinite(k)):
        raise ValueError(f"coupling must be > 0, got {k}")
    return k * abs(math.sin(theta_j_star - theta_i_star))


def demand_response(delta_ji: float, epsilon_d: float) -> float:
    """Demand-side change absorbing a supply fluctuation.

    Finite elasticity (epsilon_d < 0) absorbs the fluctuation in full,
    returning -delta_ji; rigid demand (epsilon_d == 0) returns 0.
    """
    if epsilon_d > 0.0 or not math.isfinite(epsilon_d):
        raise ValueError(f"epsilon_d must be <= 0, got {epsilon_d}")
    if epsilon_d < 0.0:
        return -delta_ji
    return 0.0


def clear_price(market: EdgeMarket, delta_ji: float) -> float:
    """Price at which shifted supply meets the demand curve.

    Solves d0 (p/p0)^eps_d = s0 (p/p0)^eps_s + delta by bracketed bisection
    to relative tolerance 1e-10. Diagnostic only; the dynamics use the
    binary absorption rule of demand_response.
    """
    p = market.params
    d0, s0 = market.d0, market.s0
    if d0 <= 0.0:
        raise ValueError("clear_price needs d0 > 0")
    if delta_ji <= -s0:
        raise NoClearingPrice(
            f"supply shift {delta_ji} leaves nonpositive supply (s0 = {s0})"
        )
    if p.epsilon_d == 0.0:
        if delta_ji == 0.0:
            return p.p0
        raise NoClearingPrice("vertical demand cannot absorb a shifted supply")
    if delta_ji == 0.0:
        return p.p0

    def excess(x: float) -> float:
        # demand minus shifted supply at price ratio x = p / p0; strictly
        # decreasing since eps_d < 0 <= eps_s
        return d0 * x**p.epsilon_d - s0 * x**p.epsilon_s - delta_ji

    lo = hi = 1.0
    while excess(lo) < 0.0:
        lo *= 0.5
        if lo < 1e-300:
            raise NoClearingPrice("no bracket found below the reference price")
    while excess(hi) > 0.0:
        hi *= 2.0
        if hi > 1e300:
            raise NoClearingPrice("no bracket found above the reference price")
    while (hi - lo) > _BISECTION_REL_TOL * 0.5 * (hi + lo):
        mid = 0.5 * (lo + hi)
        if excess(mid) >= 0.0:
            lo = mid
        else:
            hi = mid
    return p.p0 * 0.5 * (lo + hi)


def active_fluctuations(
    shocks: Sequence[ShockEvent], t: float, market_params: MarketParams
) -> FluctuationLedger:
    """Ledger of fluctuations from every shock whose onset has passed.

    An active shock on (j, i) writes its magnitude to (j, i) and, under
    finite demand elasticity, the absorbing response to (i, j). Two active
    shocks writing the same directed pair have no defined superposition and
    raise ValueError.
    """
    entries: dict[tuple[int, int], float] = {}

    def write(pair: tuple[int, int], value: float) -> None:
        if pair in entries:
            raise ValueError(
                f"overlapping shocks write the same directed pair {pair}"
            )
        entries[pair] = value

    for shock in shocks:
        if shock.onset > t:
            continue
        j, i = shock.edge
        write((j, i), shock.magnitude)
        response = demand_response(shock.magnitude, market_params.epsilon_d)
        if market_params.epsilon_d < 0.0:
            write((i, j), response)
    return FluctuationLedger(entries=entries)
