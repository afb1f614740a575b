"""File outputs of the command line: delimited tables and rendered figures.

Every report function writes deterministic CSV (17 significant digits) and,
alongside it, a PNG rendered with the Agg backend so runs work headless.
"""
from __future__ import annotations

from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .sim import ClusterPartition, Trajectory, mean_velocity, window_mean_phases

__all__ = [
    "write_stationary_csv",
    "write_couplings_csv",
    "write_phases_check_csv",
    "write_sweep_csv",
    "write_summary",
    "save_stationary_figure",
    "save_calibration_figure",
    "save_trajectory_figures",
    "save_sweep_figure",
]


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def write_stationary_csv(path: Path, theta_star: np.ndarray, couplings: np.ndarray) -> None:
    """Profile table: index, equilibrium phase, coupling to the next oscillator."""
    lines = ["index,theta_star,coupling_to_next"]
    n = theta_star.size
    for i in range(n):
        k = _fmt(couplings[i]) if i < n - 1 else ""
        lines.append(f"{i},{_fmt(theta_star[i])},{k}")
    path.write_text("\n".join(lines) + "\n")


def write_couplings_csv(path: Path, couplings: np.ndarray) -> None:
    lines = ["index,coupling"]
    lines += [f"{i},{_fmt(k)}" for i, k in enumerate(couplings)]
    path.write_text("\n".join(lines) + "\n")


def write_phases_check_csv(
    path: Path, observed: np.ndarray, reconstructed: np.ndarray
) -> None:
    lines = ["index,theta_observed,theta_reconstructed,error"]
    for i, (obs, rec) in enumerate(zip(observed, reconstructed)):
        lines.append(f"{i},{_fmt(obs)},{_fmt(rec)},{_fmt(rec - obs)}")
    path.write_text("\n".join(lines) + "\n")


def write_sweep_csv(path: Path, rows: Sequence[dict]) -> None:
    lines = ["value,final_r,n_clusters,mean_velocity_final,error"]
    for row in rows:
        if row.get("error"):
            lines.append(f"{_fmt(row['value'])},,,," + str(row["error"]).replace(",", ";"))
        else:
            lines.append(
                f"{_fmt(row['value'])},{_fmt(row['final_r'])},{row['n_clusters']},"
                f"{_fmt(row['mean_velocity_final'])},"
            )
    path.write_text("\n".join(lines) + "\n")


def cluster_phase_spreads(traj: Trajectory, partition: ClusterPartition, window: float) -> np.ndarray:
    """Spread of window-averaged phases inside each cluster.

    Averaging over the window removes the forced ripple that detached
    neighbours imprint on a cluster, leaving its own internal extension.
    """
    means = window_mean_phases(traj, window)
    out = np.zeros(partition.n_clusters)
    for label in range(partition.n_clusters):
        phases = means[partition.members(label)]
        out[label] = phases.max() - phases.min()
    return out


def summary_lines(traj: Trajectory, partition: ClusterPartition, window: float) -> list[str]:
    vbar = mean_velocity(traj)
    spreads = cluster_phase_spreads(traj, partition, window)
    lines = [
        f"final_r = {_fmt(traj.r[-1])}",
        f"final_mean_velocity = {_fmt(vbar[-1])}",
        f"n_clusters = {partition.n_clusters}",
    ]
    for label in range(partition.n_clusters):
        members = partition.members(label)
        lines.append(
            f"cluster_{label}: members={_member_ranges(members)} "
            f"drift={_fmt(partition.drift_rates[label])} "
            f"phase_spread={_fmt(spreads[label])}"
        )
    return lines


def _member_ranges(members: np.ndarray) -> str:
    """Compact 0-4,7,9-11 style listing."""
    chunks = []
    start = prev = int(members[0])
    for m in members[1:]:
        m = int(m)
        if m == prev + 1:
            prev = m
            continue
        chunks.append(f"{start}-{prev}" if prev > start else f"{start}")
        start = prev = m
    chunks.append(f"{start}-{prev}" if prev > start else f"{start}")
    return ",".join(chunks)


def write_summary(path: Path, traj: Trajectory, partition: ClusterPartition, window: float) -> None:
    path.write_text("\n".join(summary_lines(traj, partition, window)) + "\n")


def _save(fig, path: Path) -> None:
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_stationary_figure(path: Path, theta_star: np.ndarray) -> None:
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(np.arange(theta_star.size), theta_star, "o-", ms=4)
    ax.set_xlabel("oscillator")
    ax.set_ylabel(r"$\theta^*$ [rad]")
    ax.set_title("Stationary phase profile")
    _save(fig, path)


def save_calibration_figure(path: Path, observed: np.ndarray, reconstructed: np.ndarray) -> None:
    idx = np.arange(observed.size)
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(idx, observed, "o", ms=5, label="observed")
    ax.plot(idx, reconstructed, "x", ms=6, label="reconstructed")
    ax.set_xlabel("oscillator")
    ax.set_ylabel("phase [rad]")
    ax.set_title("Observed vs reconstructed stationary phases")
    ax.legend()
    _save(fig, path)


def save_trajectory_figures(outdir: Path, traj: Trajectory) -> list[Path]:
    paths = []

    fig, ax = plt.subplots(figsize=(7, 4))
    ax.plot(traj.times, traj.order[:, 0], label="Re q")
    ax.plot(traj.times, traj.order[:, 1], label="Im q")
    ax.plot(traj.times, traj.r, "--", label="r", color="gray")
    ax.set_xlabel("t")
    ax.set_ylabel("order parameter")
    ax.set_ylim(-1.05, 1.05)
    ax.legend(loc="lower left")
    p = outdir / "order_parameter.png"
    _save(fig, p)
    paths.append(p)

    fig, ax = plt.subplots(figsize=(7, 4))
    for i in range(traj.n):
        ax.plot(traj.times, traj.thetas[:, i], lw=0.8)
    ax.set_xlabel("t")
    ax.set_ylabel(r"$\theta_i$ [rad]")
    ax.set_title("Phase evolution")
    p = outdir / "phase_evolution.png"
    _save(fig, p)
    paths.append(p)

    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(np.arange(traj.n), traj.thetas[-1], "o-", ms=4)
    ax.set_xlabel("oscillator")
    ax.set_ylabel(r"$\theta_i$ at final time [rad]")
    ax.set_title(f"Phases at t = {traj.times[-1]:g}")
    p = outdir / "final_phases.png"
    _save(fig, p)
    paths.append(p)
    return paths


def save_sweep_figure(path: Path, rows: Sequence[dict], parameter: str) -> None:
    ok = [row for row in rows if not row.get("error")]
    fig, ax = plt.subplots(figsize=(6, 4))
    if ok:
        values = [row["value"] for row in ok]
        finals = [row["final_r"] for row in ok]
        ax.plot(values, finals, "o-")
    ax.set_xlabel(parameter)
    ax.set_ylabel("final r")
    ax.set_ylim(0, 1.05)
    ax.set_title(f"Final coherence vs {parameter}")
    _save(fig, path)
