"""Domain types and equations of motion for the sector-oscillator network.

Each sector is a rotator with inertia: its phase acceleration is driven by a
net external input, damped in proportion to phase velocity, and coupled to
its trading partners through the sine of the phase difference. Market
fluctuations enter additively per directed edge.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping

import numpy as np

__all__ = [
    "SystemParams",
    "Topology",
    "PhaseState",
    "FluctuationLedger",
    "acceleration",
    "growth_rate",
]


def _readonly_vector(values, n: int, name: str) -> np.ndarray:
    vec = np.array(values, dtype=float)
    if vec.ndim != 1 or vec.shape[0] != n:
        raise ValueError(f"{name} must be a vector of length {n}, got shape {vec.shape}")
    if not np.all(np.isfinite(vec)):
        raise ValueError(f"{name} must be finite")
    vec.setflags(write=False)
    return vec


@dataclass(frozen=True, eq=False)
class SystemParams:
    """Static parameters of the oscillator system.

    ``net_input[i]`` is the exogenous drive on oscillator i (input from
    outside the system minus output to outside). ``alpha`` is the
    dissipation constant and ``period`` the common cycle length; the
    common angular frequency is derived as ``2 * pi / period``.
    """

    n: int
    net_input: np.ndarray
    alpha: float
    period: float

    def __post_init__(self):
        if self.n < 2:
            raise ValueError(f"n must be >= 2, got {self.n}")
        object.__setattr__(
            self, "net_input", _readonly_vector(self.net_input, self.n, "net_input")
        )
        if not (self.alpha >= 0.0 and math.isfinite(self.alpha)):
            raise ValueError(f"alpha must be >= 0, got {self.alpha}")
        if not (self.period > 0.0 and math.isfinite(self.period)):
            raise ValueError(f"period must be > 0, got {self.period}")

    @property
    def omega(self) -> float:
        """Common angular frequency (radians per time unit)."""
        return 2.0 * math.pi / self.period

    @classmethod
    def endpoints(cls, n: int, p: float, alpha: float, period: float) -> "SystemParams":
        """Net-input pattern +p on the first oscillator, -p on the last."""
        net = np.zeros(n)
        net[0] = p
        net[-1] = -p
        return cls(n=n, net_input=net, alpha=alpha, period=period)


@dataclass(frozen=True, eq=False)
class Topology:
    """Weighted undirected coupling graph.

    Edges are stored once per unordered pair with ``edge_i < edge_j``; the
    coupling is symmetric. ``edge_i``, ``edge_j`` and ``coupling`` are
    parallel arrays, sorted by (i, j) for deterministic iteration.
    """

    n: int
    edge_i: np.ndarray
    edge_j: np.ndarray
    coupling: np.ndarray
    _pair_index: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.n < 1:
            raise ValueError(f"n must be >= 1, got {self.n}")
        ei = np.asarray(self.edge_i, dtype=np.intp)
        ej = np.asarray(self.edge_j, dtype=np.intp)
        k = np.array(self.coupling, dtype=float)
        if not (ei.shape == ej.shape == k.shape) or ei.ndim != 1:
            raise ValueError("edge arrays must be 1-d and of equal length")
        if ei.size and (ei.min() < 0 or ej.max() >= self.n):
            raise ValueError("edge endpoints out of range")
        if np.any(ei >= ej):
            raise ValueError("edges must be stored with i < j (no self-loops)")
        if not np.all(np.isfinite(k)) or np.any(k <= 0.0):
            raise ValueError("couplings must be finite and > 0")
        order = np.lexsort((ej, ei))
        ei, ej, k = ei[order], ej[order], k[order]
        pairs = {}
        for row, (a, b) in enumerate(zip(ei.tolist(), ej.tolist())):
            if (a, b) in pairs:
                raise ValueError(f"duplicate edge ({a}, {b})")
            pairs[(a, b)] = row
        for arr in (ei, ej, k):
            arr.setflags(write=False)
        object.__setattr__(self, "edge_i", ei)
        object.__setattr__(self, "edge_j", ej)
        object.__setattr__(self, "coupling", k)
        object.__setattr__(self, "_pair_index", pairs)

    @classmethod
    def chain(cls, n: int, couplings) -> "Topology":
        """Nearest-neighbour chain: edge (i, i+1) for i = 0..n-2."""
        k = np.asarray(couplings, dtype=float)
        if k.shape != (n - 1,):
            raise ValueError(f"chain of {n} oscillators needs {n - 1} couplings")
        idx = np.arange(n - 1)
        return cls(n=n, edge_i=idx, edge_j=idx + 1, coupling=k)

    @classmethod
    def complete(cls, n: int, k: float) -> "Topology":
        """All-pairs graph with a uniform coupling, n(n-1)/2 edges."""
        ei, ej = np.triu_indices(n, k=1)
        return cls(n=n, edge_i=ei, edge_j=ej, coupling=np.full(ei.size, float(k)))

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[tuple[int, int, float]]) -> "Topology":
        """Build from (i, j, coupling) triples; order of endpoints is free."""
        ei, ej, ks = [], [], []
        for a, b, k in edges:
            if a == b:
                raise ValueError(f"self-loop on oscillator {a}")
            lo, hi = (a, b) if a < b else (b, a)
            ei.append(lo)
            ej.append(hi)
            ks.append(k)
        return cls(
            n=n,
            edge_i=np.asarray(ei, dtype=np.intp),
            edge_j=np.asarray(ej, dtype=np.intp),
            coupling=np.asarray(ks, dtype=float),
        )

    @property
    def n_edges(self) -> int:
        return int(self.edge_i.size)

    def has_edge(self, a: int, b: int) -> bool:
        lo, hi = (a, b) if a < b else (b, a)
        return (lo, hi) in self._pair_index

    def coupling_of(self, a: int, b: int) -> float:
        lo, hi = (a, b) if a < b else (b, a)
        try:
            return float(self.coupling[self._pair_index[(lo, hi)]])
        except KeyError:
            raise ValueError(f"no edge between {a} and {b}") from None

    def edges(self) -> Iterator[tuple[int, int, float]]:
        for a, b, k in zip(self.edge_i.tolist(), self.edge_j.tolist(), self.coupling):
            yield a, b, float(k)

    def neighbors(self, i: int) -> list[tuple[int, float]]:
        out = []
        for a, b, k in self.edges():
            if a == i:
                out.append((b, k))
            elif b == i:
                out.append((a, k))
        return out

    def scaled(self, factor: float) -> "Topology":
        """Same graph with every coupling multiplied by ``factor``."""
        if not (factor > 0.0 and math.isfinite(factor)):
            raise ValueError(f"scale factor must be > 0, got {factor}")
        return Topology(
            n=self.n, edge_i=self.edge_i, edge_j=self.edge_j, coupling=self.coupling * factor
        )


@dataclass(frozen=True, eq=False)
class PhaseState:
    """Phases and phase velocities at one instant.

    Phases are cumulative radians, never reduced modulo 2*pi, so drifting
    oscillators keep measurable winding; wrap only for display.
    """

    t: float
    theta: np.ndarray
    theta_dot: np.ndarray

    def __post_init__(self):
        if not math.isfinite(self.t):
            raise ValueError("t must be finite")
        theta = np.array(self.theta, dtype=float)
        if theta.ndim != 1 or theta.size == 0:
            raise ValueError("theta must be a non-empty vector")
        n = theta.shape[0]
        object.__setattr__(self, "theta", _readonly_vector(theta, n, "theta"))
        object.__setattr__(
            self, "theta_dot", _readonly_vector(self.theta_dot, n, "theta_dot")
        )

    @property
    def n(self) -> int:
        return int(self.theta.shape[0])

    @classmethod
    def at_rest(cls, theta, t: float = 0.0) -> "PhaseState":
        theta = np.asarray(theta, dtype=float)
        return cls(t=t, theta=theta, theta_dot=np.zeros_like(theta))


@dataclass(frozen=True, eq=False)
class FluctuationLedger:
    """Active market fluctuations keyed by directed pair.

    ``entries[(j, i)]`` is the amount added to oscillator i's equation from
    the market it shares with j. Absent pairs contribute zero. Entries must
    sit on edges of the topology they are evaluated against.
    """

    entries: Mapping[tuple[int, int], float]

    def __post_init__(self):
        clean = {}
        for key, value in dict(self.entries).items():
            j, i = key
            if j == i:
                raise ValueError(f"fluctuation pair ({j}, {i}) is a self-loop")
            value = float(value)
            if not math.isfinite(value):
                raise ValueError(f"fluctuation on ({j}, {i}) must be finite")
            clean[(int(j), int(i))] = value
        object.__setattr__(self, "entries", clean)

    @classmethod
    def empty(cls) -> "FluctuationLedger":
        return cls(entries={})

    def __bool__(self) -> bool:
        return bool(self.entries)

    def amount(self, j: int, i: int) -> float:
        return self.entries.get((j, i), 0.0)

    def per_node_sum(self, topo: Topology) -> np.ndarray:
        """Sum of incoming fluctuations per oscillator, validated on edges."""
        out = np.zeros(topo.n)
        for (j, i), value in self.entries.items():
            if not (0 <= i < topo.n and 0 <= j < topo.n) or not topo.has_edge(j, i):
                raise ValueError(f"fluctuation pair ({j}, {i}) is not an edge")
            out[i] += value
        return out


def _edge_sum(theta: np.ndarray, topo: Topology) -> np.ndarray:
    """Per-oscillator coupling term: sum of k * sin(theta_j - theta_i)."""
    s = topo.coupling * np.sin(theta[topo.edge_j] - theta[topo.edge_i])
    return np.bincount(topo.edge_i, weights=s, minlength=topo.n) - np.bincount(
        topo.edge_j, weights=s, minlength=topo.n
    )


def acceleration(
    state: PhaseState,
    params: SystemParams,
    topo: Topology,
    fluct: FluctuationLedger | None = None,
) -> np.ndarray:
    """Phase accelerations of every oscillator.

    For oscillator i this is ``P_i - alpha * theta_dot_i`` plus, over each
    incident edge (j, i), ``k_ji * sin(theta_j - theta_i)`` and the active
    fluctuation entering from j. Pure function of its inputs.
    """
    if not (state.n == params.n == topo.n):
        raise ValueError(
            f"dimension mismatch: state n={state.n}, params n={params.n}, topo n={topo.n}"
        )
    acc = params.net_input - params.alpha * state.theta_dot + _edge_sum(state.theta, topo)
    if fluct is not None and fluct:
        acc += fluct.per_node_sum(topo)
    return acc


def growth_rate(state: PhaseState, params: SystemParams, wall_time: float) -> np.ndarray:
    """Normalized production growth rate sin(omega * t + theta_i) per sector."""
    if state.n != params.n:
        raise ValueError(f"dimension mismatch: state n={state.n}, params n={params.n}")
    return np.sin(params.omega * wall_time + state.theta)
