"""Static vector plots of simulation results (no display server required)."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

from .sim import SimRecord


def _series(records: list[SimRecord], attr: str) -> list[float]:
    return [getattr(rec, attr) for rec in records]


def save_standard_plots(
    out_dir: Path,
    stem: str,
    controlled: list[SimRecord] | None,
    uncontrolled: list[SimRecord] | None,
) -> list[Path]:
    """Write yaw-rate, sideslip and trajectory figures; returns the paths."""
    runs = [(label, recs) for label, recs in (("controlled", controlled), ("uncontrolled", uncontrolled)) if recs]
    if not runs:
        raise ValueError("need at least one run to plot")
    paths = []

    fig, ax = plt.subplots(figsize=(7, 4))
    for label, recs in runs:
        ax.plot(_series(recs, "t"), _series(recs, "r"), label=label)
    ax.plot(_series(runs[0][1], "t"), _series(runs[0][1], "r_ref"), "k--", label="reference")
    ax.set_xlabel("time [s]")
    ax.set_ylabel("yaw rate [rad/s]")
    ax.grid(True)
    ax.legend()
    path = out_dir / f"{stem}_yaw_rate.svg"
    fig.savefig(path)
    plt.close(fig)
    paths.append(path)

    fig, ax = plt.subplots(figsize=(7, 4))
    for label, recs in runs:
        ax.plot(_series(recs, "t"), _series(recs, "beta"), label=label)
    ax.axhline(0.0, color="k", linestyle="--", linewidth=0.8, label="reference")
    ax.set_xlabel("time [s]")
    ax.set_ylabel("sideslip angle [rad]")
    ax.grid(True)
    ax.legend()
    path = out_dir / f"{stem}_sideslip.svg"
    fig.savefig(path)
    plt.close(fig)
    paths.append(path)

    fig, ax = plt.subplots(figsize=(6, 6))
    for label, recs in runs:
        ax.plot(_series(recs, "x"), _series(recs, "y"), label=label)
    ax.set_xlabel("X [m]")
    ax.set_ylabel("Y [m]")
    ax.set_aspect("equal", adjustable="datalim")
    ax.grid(True)
    ax.legend()
    path = out_dir / f"{stem}_trajectory.svg"
    fig.savefig(path)
    plt.close(fig)
    paths.append(path)

    return paths
