"""Scenario configuration: strict key-value file format and assembly.

Scenario files are flat ``key = value`` lines grouped under bracketed
section headers. Unknown sections or keys are hard errors, every parse
error carries its line number, and referenced files must exist at load
time. See docs/config.md for the full reference.
"""
from __future__ import annotations

import csv
import dataclasses
import math
import re
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ConfigError
from .market import MarketParams, ShockEvent
from .model import PhaseState, SystemParams, Topology
from .stationary import calibrate_couplings, chain_stationary

__all__ = ["ScenarioConfig", "Scenario", "load_config", "assemble", "read_phases_csv"]

_SECTION_RE = re.compile(r"^\[([A-Za-z0-9_.]+)\]$")
_SHOCK_SECTION_RE = re.compile(r"^shock\.(\d+)$")
_CALL_RE = re.compile(r"^([a-z_]+)\((.*)\)$")

_KNOWN_KEYS = {
    "system": {"n", "alpha", "period", "net_input"},
    "topology": {"kind", "couplings", "coupling_scale", "edges"},
    "market": {"epsilon_d", "epsilon_s", "p0"},
    "integration": {"dt", "dt_record", "horizon"},
    "initial": {"kind", "phases"},
    "shock": {"edge", "magnitude", "onset"},
    "output": {"dir", "seed"},
}

DEFAULTS = {
    "alpha": 1.0,
    "period": 60.0,
    "coupling_scale": 1.0,
    "epsilon_d": -1.0,
    "epsilon_s": 0.0,
    "p0": 1.0,
    "dt": 0.01,
    "dt_record": 0.5,
    "initial_kind": "stationary",
    "shock_magnitude": 0.5,
    "shock_onset": 100.0,
    "output_dir": "out",
    "seed": 0,
}


@dataclass(frozen=True)
class ScenarioConfig:
    """Validated scenario description, still symbolic where it can be.

    Couplings and the initial state are resolved against files and the
    topology only in :func:`assemble`, but every referenced file has been
    checked to exist and every numeric constraint has been validated.
    """

    n: int
    alpha: float
    period: float
    net_input_kind: str  # "endpoints" | "explicit"
    net_input_p: float | None
    net_input_values: tuple[float, ...] | None
    topology_kind: str  # "chain" | "complete" | "custom"
    couplings_kind: str | None  # "uniform" | "calibrate" | "explicit"
    couplings_uniform: float | None
    couplings_file: Path | None
    couplings_values: tuple[float, ...] | None
    coupling_scale: float
    custom_edges: tuple[tuple[int, int, float], ...] | None
    epsilon_d: float
    epsilon_s: float
    p0: float
    dt: float
    dt_record: float
    horizon: float
    initial_kind: str  # "stationary" | "zero-phases" | "explicit"
    initial_phases: tuple[float, ...] | None
    shocks: tuple[ShockEvent, ...]
    seed: int
    output_dir: Path


@dataclass(frozen=True)
class Scenario:
    """Everything a run needs, resolved and validated against each other."""

    params: SystemParams
    topology: Topology  # effective: base couplings times coupling_scale
    market: MarketParams
    shocks: tuple[ShockEvent, ...]
    initial: PhaseState
    base_chain_couplings: np.ndarray | None  # unscaled, chains only
    observed_phases: np.ndarray | None  # present when calibrated from file


class _RawConfig:
    """Parsed sections before semantic validation."""

    def __init__(self):
        self.values: dict[tuple[str, str], str] = {}
        self.lines: dict[tuple[str, str], int] = {}
        self.shock_ids: list[int] = []

    def get(self, section: str, key: str) -> str | None:
        return self.values.get((section, key))


def _parse_lines(text: str, origin: str) -> _RawConfig:
    raw = _RawConfig()
    section: str | None = None
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        m = _SECTION_RE.match(stripped)
        if m:
            name = m.group(1)
            shock = _SHOCK_SECTION_RE.match(name)
            if shock:
                idx = int(shock.group(1))
                if idx in raw.shock_ids:
                    raise ConfigError(f"{origin}:{lineno}: duplicate section [{name}]")
                raw.shock_ids.append(idx)
            elif name not in _KNOWN_KEYS or name == "shock":
                raise ConfigError(f"{origin}:{lineno}: unknown section [{name}]")
            section = name
            continue
        if "=" not in stripped:
            raise ConfigError(f"{origin}:{lineno}: expected 'key = value', got {stripped!r}")
        if section is None:
            raise ConfigError(f"{origin}:{lineno}: key outside any [section]")
        key, value = (part.strip() for part in stripped.split("=", 1))
        schema = "shock" if _SHOCK_SECTION_RE.match(section) else section
        if key not in _KNOWN_KEYS[schema]:
            raise ConfigError(f"{origin}:{lineno}: unknown key {key!r} in [{section}]")
        if value == "":
            raise ConfigError(f"{origin}:{lineno}: empty value for key {key!r}")
        if (section, key) in raw.values:
            raise ConfigError(f"{origin}:{lineno}: duplicate key {key!r} in [{section}]")
        raw.values[(section, key)] = value
        raw.lines[(section, key)] = lineno
    return raw


def _require(raw: _RawConfig, origin: str, section: str, key: str) -> str:
    value = raw.get(section, key)
    if value is None:
        raise ConfigError(f"{origin}: missing required key {key!r} in [{section}]")
    return value


def _parse_float(origin: str, name: str, text: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise ConfigError(f"{origin}: {name} must be a number, got {text!r}") from None
    if not math.isfinite(value):
        raise ConfigError(f"{origin}: {name} must be finite")
    return value


def _parse_int(origin: str, name: str, text: str) -> int:
    try:
        return int(text)
    except ValueError:
        raise ConfigError(f"{origin}: {name} must be an integer, got {text!r}") from None


def _parse_vector(origin: str, name: str, text: str) -> tuple[float, ...]:
    items = [part.strip() for part in text.split(",") if part.strip()]
    if not items:
        raise ConfigError(f"{origin}: {name} must be a comma-separated vector")
    return tuple(_parse_float(origin, name, item) for item in items)


def resolve_config_path(path: str | Path) -> Path:
    """Resolve a config reference; ``bundled:NAME`` names a shipped scenario."""
    text = str(path)
    if text.startswith("bundled:"):
        from . import scenarios

        try:
            return scenarios.path(text.removeprefix("bundled:"))
        except FileNotFoundError as exc:
            raise ConfigError(str(exc)) from None
    return Path(path)


def load_config(path: str | Path) -> ScenarioConfig:
    """Parse and validate a scenario file."""
    cfg_path = resolve_config_path(path)
    if not cfg_path.is_file():
        raise ConfigError(f"config file not found: {cfg_path}")
    origin = str(cfg_path)
    raw = _parse_lines(cfg_path.read_text(), origin)
    base_dir = cfg_path.parent

    n = _parse_int(origin, "n", _require(raw, origin, "system", "n"))
    if n < 2:
        raise ConfigError(f"{origin}: n must be >= 2, got {n}")

    alpha = _parse_float(origin, "alpha", raw.get("system", "alpha") or str(DEFAULTS["alpha"]))
    if alpha < 0:
        raise ConfigError(f"{origin}: alpha must be >= 0, got {alpha}")
    period = _parse_float(origin, "period", raw.get("system", "period") or str(DEFAULTS["period"]))
    if period <= 0:
        raise ConfigError(f"{origin}: period must be > 0, got {period}")

    net_text = raw.get("system", "net_input") or "endpoints(1.0)"
    call = _CALL_RE.match(net_text)
    if call and call.group(1) == "endpoints":
        net_kind = "endpoints"
        net_p: float | None = _parse_float(origin, "net_input", call.group(2))
        net_values = None
    elif call:
        raise ConfigError(f"{origin}: unknown net_input form {net_text!r}")
    else:
        net_kind = "explicit"
        net_p = None
        net_values = _parse_vector(origin, "net_input", net_text)
        if len(net_values) != n:
            raise ConfigError(
                f"{origin}: net_input needs {n} entries, got {len(net_values)}"
            )

    topo_kind = _require(raw, origin, "topology", "kind")
    if topo_kind not in ("chain", "complete", "custom"):
        raise ConfigError(
            f"{origin}: topology kind must be chain, complete or custom, got {topo_kind!r}"
        )
    coupling_scale = _parse_float(
        origin, "coupling_scale", raw.get("topology", "coupling_scale") or str(DEFAULTS["coupling_scale"])
    )
    if coupling_scale <= 0:
        raise ConfigError(f"{origin}: coupling_scale must be > 0, got {coupling_scale}")

    couplings_kind = None
    couplings_uniform = None
    couplings_file = None
    couplings_values = None
    custom_edges = None
    if topo_kind == "custom":
        edges_text = _require(raw, origin, "topology", "edges")
        triples = []
        for chunk in edges_text.split(";"):
            chunk = chunk.strip()
            if not chunk:
                continue
            parts = [p.strip() for p in chunk.split(",")]
            if len(parts) != 3:
                raise ConfigError(
                    f"{origin}: edges entries must be 'i,j,k' triples, got {chunk!r}"
                )
            i = _parse_int(origin, "edges", parts[0])
            j = _parse_int(origin, "edges", parts[1])
            k = _parse_float(origin, "edges", parts[2])
            if not (0 <= i < n and 0 <= j < n):
                raise ConfigError(f"{origin}: edge ({i}, {j}) out of range for n = {n}")
            if k <= 0:
                raise ConfigError(f"{origin}: edge coupling must be > 0, got {k}")
            triples.append((i, j, k))
        if not triples:
            raise ConfigError(f"{origin}: custom topology needs at least one edge")
        custom_edges = tuple(triples)
    else:
        coup_text = _require(raw, origin, "topology", "couplings")
        call = _CALL_RE.match(coup_text)
        if call and call.group(1) == "uniform":
            couplings_kind = "uniform"
            couplings_uniform = _parse_float(origin, "couplings", call.group(2))
            if couplings_uniform <= 0:
                raise ConfigError(f"{origin}: uniform coupling must be > 0")
        elif call and call.group(1) == "calibrate":
            if topo_kind != "chain":
                raise ConfigError(f"{origin}: calibrate(...) couplings require a chain topology")
            couplings_kind = "calibrate"
            couplings_file = (base_dir / call.group(2).strip()).resolve()
            if not couplings_file.is_file():
                raise ConfigError(f"{origin}: phases file not found: {couplings_file}")
        elif call:
            raise ConfigError(f"{origin}: unknown couplings form {coup_text!r}")
        else:
            if topo_kind != "chain":
                raise ConfigError(
                    f"{origin}: explicit coupling vectors are only supported for chains"
                )
            couplings_kind = "explicit"
            couplings_values = _parse_vector(origin, "couplings", coup_text)
            if len(couplings_values) != n - 1:
                raise ConfigError(
                    f"{origin}: chain couplings need {n - 1} entries, got {len(couplings_values)}"
                )
            if any(k <= 0 for k in couplings_values):
                raise ConfigError(f"{origin}: couplings must be > 0")

    epsilon_d = _parse_float(
        origin, "epsilon_d", raw.get("market", "epsilon_d") or str(DEFAULTS["epsilon_d"])
    )
    if epsilon_d > 0:
        raise ConfigError(f"{origin}: epsilon_d must be <= 0, got {epsilon_d}")
    epsilon_s = _parse_float(
        origin, "epsilon_s", raw.get("market", "epsilon_s") or str(DEFAULTS["epsilon_s"])
    )
    if epsilon_s < 0:
        raise ConfigError(f"{origin}: epsilon_s must be >= 0, got {epsilon_s}")
    p0 = _parse_float(origin, "p0", raw.get("market", "p0") or str(DEFAULTS["p0"]))
    if p0 <= 0:
        raise ConfigError(f"{origin}: p0 must be > 0, got {p0}")

    dt = _parse_float(origin, "dt", raw.get("integration", "dt") or str(DEFAULTS["dt"]))
    dt_record = _parse_float(
        origin, "dt_record", raw.get("integration", "dt_record") or str(DEFAULTS["dt_record"])
    )
    horizon = _parse_float(origin, "horizon", _require(raw, origin, "integration", "horizon"))
    if not (0 < dt <= dt_record):
        raise ConfigError(f"{origin}: need 0 < dt <= dt_record, got dt={dt}, dt_record={dt_record}")
    if horizon <= 0:
        raise ConfigError(f"{origin}: horizon must be > 0, got {horizon}")

    initial_kind = raw.get("initial", "kind") or DEFAULTS["initial_kind"]
    if initial_kind not in ("stationary", "zero-phases", "explicit"):
        raise ConfigError(
            f"{origin}: initial kind must be stationary, zero-phases or explicit, got {initial_kind!r}"
        )
    initial_phases = None
    if initial_kind == "explicit":
        phases_text = _require(raw, origin, "initial", "phases")
        initial_phases = _parse_vector(origin, "initial phases", phases_text)
        if len(initial_phases) != n:
            raise ConfigError(
                f"{origin}: initial phases need {n} entries, got {len(initial_phases)}"
            )
    elif raw.get("initial", "phases") is not None:
        raise ConfigError(f"{origin}: initial phases are only allowed with kind = explicit")

    shocks = []
    for idx in sorted(raw.shock_ids):
        section = f"shock.{idx}"
        edge_text = _require(raw, origin, section, "edge")
        parts = [p.strip() for p in edge_text.split(",")]
        if len(parts) != 2:
            raise ConfigError(f"{origin}: shock edge must be 'from,into', got {edge_text!r}")
        j = _parse_int(origin, "shock edge", parts[0])
        i = _parse_int(origin, "shock edge", parts[1])
        if not (0 <= i < n and 0 <= j < n) or i == j:
            raise ConfigError(f"{origin}: shock edge ({j}, {i}) invalid for n = {n}")
        magnitude = _parse_float(
            origin, "shock magnitude",
            raw.get(section, "magnitude") or str(DEFAULTS["shock_magnitude"]),
        )
        onset = _parse_float(
            origin, "shock onset", raw.get(section, "onset") or str(DEFAULTS["shock_onset"])
        )
        if onset < 0:
            raise ConfigError(f"{origin}: shock onset must be >= 0, got {onset}")
        shocks.append(ShockEvent(edge=(j, i), magnitude=magnitude, onset=onset))

    seed = _parse_int(origin, "seed", raw.get("output", "seed") or str(DEFAULTS["seed"]))
    output_dir = Path(raw.get("output", "dir") or DEFAULTS["output_dir"])

    return ScenarioConfig(
        n=n,
        alpha=alpha,
        period=period,
        net_input_kind=net_kind,
        net_input_p=net_p,
        net_input_values=net_values,
        topology_kind=topo_kind,
        couplings_kind=couplings_kind,
        couplings_uniform=couplings_uniform,
        couplings_file=couplings_file,
        couplings_values=couplings_values,
        coupling_scale=coupling_scale,
        custom_edges=custom_edges,
        epsilon_d=epsilon_d,
        epsilon_s=epsilon_s,
        p0=p0,
        dt=dt,
        dt_record=dt_record,
        horizon=horizon,
        initial_kind=initial_kind,
        initial_phases=initial_phases,
        shocks=tuple(shocks),
        seed=seed,
        output_dir=output_dir,
    )


def read_phases_csv(path: str | Path) -> np.ndarray:
    """Read an observed-phase table with columns ``index,theta_observed``."""
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"phases file not found: {path}")
    rows: dict[int, float] = {}
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header[:2]] != ["index", "theta_observed"]:
            raise ConfigError(
                f"{path}: expected header 'index,theta_observed', got {header!r}"
            )
        for lineno, row in enumerate(reader, start=2):
            if not row or not "".join(row).strip():
                continue
            try:
                idx = int(row[0])
                value = float(row[1])
            except (IndexError, ValueError):
                raise ConfigError(f"{path}:{lineno}: malformed row {row!r}") from None
            if idx in rows:
                raise ConfigError(f"{path}:{lineno}: duplicate index {idx}")
            if not math.isfinite(value):
                raise ConfigError(f"{path}:{lineno}: phase must be finite")
            rows[idx] = value
    if not rows:
        raise ConfigError(f"{path}: no phase rows found")
    n = len(rows)
    if sorted(rows) != list(range(n)):
        raise ConfigError(f"{path}: indices must be exactly 0..{n - 1}")
    return np.array([rows[i] for i in range(n)])


def _resolve_net_input(config: ScenarioConfig) -> SystemParams:
    if config.net_input_kind == "endpoints":
        return SystemParams.endpoints(
            config.n, config.net_input_p, alpha=config.alpha, period=config.period
        )
    return SystemParams(
        n=config.n,
        net_input=np.array(config.net_input_values),
        alpha=config.alpha,
        period=config.period,
    )


def endpoint_drive(config: ScenarioConfig) -> float:
    """The endpoint net input P, required by chain-stationary commands."""
    if config.net_input_kind != "endpoints":
        raise ConfigError("this operation requires the endpoints(P) net-input pattern")
    return float(config.net_input_p)


def assemble(config: ScenarioConfig) -> Scenario:
    """Resolve a config into runnable parts.

    Chain couplings are taken from the config (explicit or uniform) or
    calibrated from the referenced observed-phase file; ``coupling_scale``
    multiplies them into the effective topology. ``initial = stationary``
    starts at the synchronized profile of the unscaled base couplings,
    anchored to the observed phases when those exist.
    """
    params = _resolve_net_input(config)
    market = MarketParams(epsilon_d=config.epsilon_d, epsilon_s=config.epsilon_s, p0=config.p0)

    observed = None
    base_chain = None
    if config.topology_kind == "chain":
        if config.couplings_kind == "explicit":
            base_chain = np.array(config.couplings_values)
        elif config.couplings_kind == "uniform":
            base_chain = np.full(config.n - 1, config.couplings_uniform)
        else:
            observed = read_phases_csv(config.couplings_file)
            if observed.size != config.n:
                raise ConfigError(
                    f"{config.couplings_file}: has {observed.size} phases, config says n = {config.n}"
                )
            base_chain = calibrate_couplings(observed, endpoint_drive(config))
        topology = Topology.chain(config.n, base_chain * config.coupling_scale)
    elif config.topology_kind == "complete":
        if config.couplings_kind != "uniform":
            raise ConfigError("complete topology requires couplings = uniform(k)")
        topology = Topology.complete(
            config.n, config.couplings_uniform * config.coupling_scale
        )
    else:
        topology = Topology.from_edges(
            config.n,
            [(i, j, k * config.coupling_scale) for i, j, k in config.custom_edges],
        )

    for shock in config.shocks:
        if not topology.has_edge(*shock.edge):
            raise ConfigError(f"shock pair {shock.edge} is not an edge of the topology")

    if config.initial_kind == "explicit":
        initial = PhaseState.at_rest(np.array(config.initial_phases))
    elif config.initial_kind == "zero-phases":
        initial = PhaseState.at_rest(np.zeros(config.n))
    else:
        if config.topology_kind != "chain":
            raise ConfigError("initial = stationary requires a chain topology")
        if observed is not None:
            # calibrated chains: the observed profile is the stationary state,
            # kept at its own anchoring
            initial = PhaseState.at_rest(observed)
        else:
            profile = chain_stationary(endpoint_drive(config), base_chain, config.n)
            initial = PhaseState.at_rest(profile.theta_star)

    return Scenario(
        params=params,
        topology=topology,
        market=market,
        shocks=config.shocks,
        initial=initial,
        base_chain_couplings=base_chain,
        observed_phases=observed,
    )
