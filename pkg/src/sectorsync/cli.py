"""Command line: stationary profiles, calibration, simulation, sweeps.

Exit codes: 0 success, 2 configuration or validation error, 3 infeasible
analytic solve (no stationary solution / calibration), 4 integration
divergence.
"""
from __future__ import annotations

import argparse
import dataclasses
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import report
from .config import (
    Scenario,
    ScenarioConfig,
    assemble,
    endpoint_drive,
    load_config,
    read_phases_csv,
)
from .errors import (
    CalibrationInfeasible,
    ConfigError,
    IntegrationDiverged,
    NoClearingPrice,
    NoStationarySolution,
)
from .sim import (
    CLUSTER_TOLERANCE,
    CLUSTER_WINDOW_FRACTION,
    detect_clusters,
    mean_velocity,
    simulate,
    write_trajectory_csv,
)
from .stationary import calibrate_couplings, chain_stationary, stationarity_residual

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_INFEASIBLE = 3
EXIT_DIVERGED = 4

SWEEP_PARAMETERS = ("coupling_scale", "shock_magnitude", "epsilon_d")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sectorsync",
        description="Simulate networks of inertial sector oscillators coupled through goods markets.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", type=Path, default=None, help="output directory override")
    common.add_argument("--quiet", action="store_true", help="suppress informational output")

    config_arg = argparse.ArgumentParser(add_help=False)
    config_arg.add_argument(
        "--config",
        required=True,
        help="scenario file path, or bundled:NAME for a shipped scenario",
    )

    p = sub.add_parser(
        "stationary",
        parents=[config_arg, common],
        help="write the analytic synchronized profile of a chain scenario",
    )
    p.set_defaults(func=cmd_stationary)

    p = sub.add_parser(
        "calibrate",
        parents=[common],
        help="invert observed phases into chain couplings",
    )
    p.add_argument("--phases", required=True, type=Path, help="CSV with index,theta_observed")
    p.add_argument(
        "--net-input", type=float, default=1.0, metavar="P",
        help="endpoint drive magnitude (default 1.0)",
    )
    p.set_defaults(func=cmd_calibrate)

    p = sub.add_parser(
        "simulate",
        parents=[config_arg, common],
        help="integrate a scenario and write trajectory, summary and figures",
    )
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser(
        "sweep",
        parents=[config_arg, common],
        help="rerun a scenario over a list of parameter values",
    )
    p.add_argument("--parameter", required=True, choices=SWEEP_PARAMETERS)
    p.add_argument(
        "--values", required=True,
        help="comma-separated list of parameter values, e.g. 1.0,0.5,0.3",
    )
    p.set_defaults(func=cmd_sweep)
    return parser


def _outdir(args, config: ScenarioConfig | None) -> Path:
    if args.out is not None:
        out = args.out
    elif config is not None:
        out = config.output_dir
    else:
        out = Path("out")
    out.mkdir(parents=True, exist_ok=True)
    return out


def _say(args, message: str) -> None:
    if not args.quiet:
        print(message)


def cmd_stationary(args) -> int:
    config = load_config(args.config)
    if config.topology_kind != "chain":
        raise ConfigError("stationary requires a chain topology")
    scenario = assemble(config)
    p = endpoint_drive(config)
    effective = scenario.base_chain_couplings * config.coupling_scale
    profile = chain_stationary(p, effective, config.n)
    residual = stationarity_residual(profile, scenario.params, scenario.topology)

    out = _outdir(args, config)
    report.write_stationary_csv(out / "stationary.csv", profile.theta_star, effective)
    report.save_stationary_figure(out / "stationary_profile.png", profile.theta_star)
    _say(args, f"wrote {out / 'stationary.csv'}")
    _say(args, f"max residual = {residual:.3e}")
    return EXIT_OK


def cmd_calibrate(args) -> int:
    observed = read_phases_csv(args.phases)
    p = args.net_input
    couplings = calibrate_couplings(observed, p)
    profile = chain_stationary(p, couplings, observed.size)
    # re-anchor the reconstruction onto the observed last phase; calibration
    # only constrains differences
    reconstructed = profile.theta_star + observed[-1]

    out = _outdir(args, None)
    report.write_couplings_csv(out / "couplings.csv", couplings)
    report.write_phases_check_csv(out / "phases_check.csv", observed, reconstructed)
    report.save_calibration_figure(out / "calibration.png", observed, reconstructed)
    max_err = float(np.abs(reconstructed - observed).max())
    _say(args, f"wrote {out / 'couplings.csv'}")
    _say(args, f"max reconstruction error = {max_err:.3e}")
    return EXIT_OK


def _run_scenario(scenario: Scenario, config: ScenarioConfig):
    traj = simulate(
        scenario.initial,
        scenario.params,
        scenario.topology,
        config.horizon,
        dt=config.dt,
        dt_record=config.dt_record,
        shocks=scenario.shocks,
        market=scenario.market,
    )
    window = CLUSTER_WINDOW_FRACTION * config.horizon
    partition = detect_clusters(traj, window, CLUSTER_TOLERANCE)
    return traj, partition, window


def cmd_simulate(args) -> int:
    config = load_config(args.config)
    scenario = assemble(config)
    traj, partition, window = _run_scenario(scenario, config)

    out = _outdir(args, config)
    with open(out / "trajectory.csv", "w") as fh:
        write_trajectory_csv(traj, fh)
    report.write_summary(out / "summary.txt", traj, partition, window)
    report.save_trajectory_figures(out, traj)
    _say(args, f"wrote {out / 'trajectory.csv'}")
    for line in report.summary_lines(traj, partition, window):
        _say(args, line)
    return EXIT_OK


def _sweep_override(config: ScenarioConfig, parameter: str, value: float) -> ScenarioConfig:
    if parameter == "coupling_scale":
        if value <= 0:
            raise ConfigError(f"coupling_scale must be > 0, got {value}")
        return dataclasses.replace(config, coupling_scale=value)
    if parameter == "shock_magnitude":
        if not config.shocks:
            raise ConfigError("scenario has no shocks to sweep the magnitude of")
        shocks = tuple(
            dataclasses.replace(shock, magnitude=value) for shock in config.shocks
        )
        return dataclasses.replace(config, shocks=shocks)
    if value > 0:
        raise ConfigError(f"epsilon_d must be <= 0, got {value}")
    return dataclasses.replace(config, epsilon_d=value)


def _sweep_run(task: tuple[ScenarioConfig, str, float]) -> dict:
    config, parameter, value = task
    row: dict = {"value": value}
    try:
        overridden = _sweep_override(config, parameter, value)
        scenario = assemble(overridden)
        traj, partition, _ = _run_scenario(scenario, overridden)
        row["final_r"] = float(traj.r[-1])
        row["n_clusters"] = partition.n_clusters
        row["mean_velocity_final"] = float(mean_velocity(traj)[-1])
    except Exception as exc:  # failures are recorded per row, sweep continues
        row["error"] = f"{type(exc).__name__}: {exc}"
    return row


def cmd_sweep(args) -> int:
    config = load_config(args.config)
    try:
        values = [float(v) for v in args.values.split(",") if v.strip()]
    except ValueError:
        raise ConfigError(f"--values must be a comma-separated number list, got {args.values!r}")
    if not values:
        raise ConfigError("--values must contain at least one value")

    tasks = [(config, args.parameter, value) for value in values]
    if len(tasks) == 1:
        rows = [_sweep_run(tasks[0])]
    else:
        workers = min(len(tasks), os.cpu_count() or 1)
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_sweep_run, tasks))

    out = _outdir(args, config)
    report.write_sweep_csv(out / "sweep.csv", rows)
    report.save_sweep_figure(out / "sweep.png", rows, args.parameter)
    _say(args, f"wrote {out / 'sweep.csv'}")
    for row in rows:
        if row.get("error"):
            _say(args, f"{args.parameter} = {row['value']:g}: FAILED ({row['error']})")
        else:
            _say(
                args,
                f"{args.parameter} = {row['value']:g}: final_r = {row['final_r']:.6f}, "
                f"clusters = {row['n_clusters']}",
            )
    return EXIT_OK


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NoStationarySolution, CalibrationInfeasible, NoClearingPrice) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except IntegrationDiverged as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DIVERGED


if __name__ == "__main__":
    sys.exit(main())
