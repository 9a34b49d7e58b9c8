"""Desired-motion generator: ideal yaw rate, zero desired sideslip.

The desired yaw rate comes from a linear single-track model evaluated on an
ideal high-grip road (friction coefficient 1) at the measured vehicle speed,
driven by the driver's front-wheel steering command. The desired sideslip is
identically zero regardless of the internal model state.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .linear_model import linearize, zoh_discretize
from .vehicle import VehicleParams


@dataclass(frozen=True)
class ReferenceState:
    """Output of the reference generator plus its internal model state."""

    beta_ref_rad: float = 0.0
    r_ref_radps: float = 0.0
    internal_state: tuple[float, float] = (0.0, 0.0)

    def __post_init__(self):
        if self.beta_ref_rad != 0.0:
            raise ValueError("desired sideslip is zero by definition")
        if not math.isfinite(self.r_ref_radps):
            raise ValueError("desired yaw rate must be finite")


@lru_cache(maxsize=128)
def _ideal_discrete_model(
    params: VehicleParams, speed_mps: float, ts_s: float
) -> tuple[np.ndarray, np.ndarray]:
    # Rebuilt whenever the measured speed changes; cached because speed is
    # constant within a run.
    sys = linearize(params, speed_mps, mu=1.0)
    return zoh_discretize(sys.a_mat, sys.b_mat, ts_s)


def reference_step(
    ref: ReferenceState,
    driver_delta_f: float,
    speed_mps: float,
    ts_s: float,
    params: VehicleParams,
) -> ReferenceState:
    """Advance the ideal model one sample and emit the desired yaw rate."""
    if not math.isfinite(driver_delta_f):
        raise ValueError("driver_delta_f must be finite")
    if speed_mps <= 0.0:
        raise ValueError("speed_mps must be > 0")
    ad, bd = _ideal_discrete_model(params, speed_mps, ts_s)
    x0, x1 = ref.internal_state
    nx0 = ad[0, 0] * x0 + ad[0, 1] * x1 + bd[0, 0] * driver_delta_f
    nx1 = ad[1, 0] * x0 + ad[1, 1] * x1 + bd[1, 0] * driver_delta_f
    return ReferenceState(
        beta_ref_rad=0.0,
        r_ref_radps=nx1,
        internal_state=(nx0, nx1),
    )


def steady_state_gains(params: VehicleParams, speed_mps: float) -> tuple[float, float]:
    """Steady-state (sideslip, yaw rate) per radian of front steering.

    Evaluated on the ideal-road model: x_ss = -A^-1 B [delta, 0].
    """
    sys = linearize(params, speed_mps, mu=1.0)
    gains = -np.linalg.solve(sys.a_mat, sys.b_mat[:, 0])
    return float(gains[0]), float(gains[1])
