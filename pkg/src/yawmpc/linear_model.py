"""Small-signal single-track state space and its zero-order-hold discretization.

State is [sideslip, yaw rate]; input is [front steering angle, yaw moment].
The continuous matrices are the exact linearization of the plant in
:mod:`yawmpc.vehicle` about straight running at constant speed, with the
friction coefficient scaling every cornering-stiffness term.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import expm

from .vehicle import VehicleParams


@dataclass(frozen=True)
class ContinuousStateSpace:
    """Continuous-time model dx/dt = A x + B u, y = C x with C = I."""

    a_mat: np.ndarray
    b_mat: np.ndarray
    speed_mps: float
    mu: float
    c_mat: np.ndarray = field(default_factory=lambda: np.eye(2))

    def __post_init__(self):
        if self.a_mat.shape != (2, 2) or self.b_mat.shape != (2, 2):
            raise ValueError("a_mat and b_mat must be 2x2")
        if not np.array_equal(self.c_mat, np.eye(2)):
            raise ValueError("c_mat must be the 2x2 identity")
        if self.b_mat[0, 1] != 0.0:
            raise ValueError("b_mat[0,1] must be exactly zero")


@dataclass(frozen=True)
class DiscreteStateSpace:
    """Discrete-time model x+ = A_D x + B_D u at fixed sample time."""

    ad_mat: np.ndarray
    bd_mat: np.ndarray
    ts_s: float

    def __post_init__(self):
        if self.ts_s <= 0.0:
            raise ValueError("ts_s must be > 0")


def linearize(params: VehicleParams, speed_mps: float, mu: float) -> ContinuousStateSpace:
    """Build the continuous lateral-dynamics model at one operating speed."""
    if not math.isfinite(speed_mps) or speed_mps <= 0.0:
        raise ValueError("speed_mps must be finite and > 0")
    if not math.isfinite(mu) or mu <= 0.0:
        raise ValueError("mu must be finite and > 0")
    m = params.mass_kg
    cf = params.c_front
    cr = params.c_rear
    iz = params.yaw_inertia
    lf = params.dist_front
    lr = params.dist_rear
    v = speed_mps
    a = np.array(
        [
            [-(cr + cf) * mu / (m * v), -1.0 + (cr * lr - cf * lf) * mu / (m * v * v)],
            [(cr * lr - cf * lf) * mu / iz, -(cr * lr * lr + cf * lf * lf) * mu / (iz * v)],
        ]
    )
    b = np.array(
        [
            [cf * mu / (m * v), 0.0],
            [cf * lf * mu / iz, 1.0 / iz],
        ]
    )
    return ContinuousStateSpace(a_mat=a, b_mat=b, speed_mps=v, mu=mu)


def zoh_discretize(a_mat: np.ndarray, b_mat: np.ndarray, ts_s: float) -> tuple[np.ndarray, np.ndarray]:
    """Exact ZOH discretization of (A, B) via the augmented matrix exponential.

    exp([[A, B], [0, 0]] * Ts) has A_D in its top-left block and B_D in its
    top-right block.
    """
    if ts_s <= 0.0:
        raise ValueError("ts_s must be > 0")
    a_mat = np.asarray(a_mat, dtype=float)
    b_mat = np.asarray(b_mat, dtype=float)
    n = a_mat.shape[0]
    m = b_mat.shape[1]
    aug = np.zeros((n + m, n + m))
    aug[:n, :n] = a_mat
    aug[:n, n:] = b_mat
    phi = expm(aug * ts_s)
    return phi[:n, :n].copy(), phi[:n, n:].copy()


def discretize_zoh(sys: ContinuousStateSpace, ts_s: float) -> DiscreteStateSpace:
    """Discretize a continuous model assuming piecewise-constant inputs."""
    ad, bd = zoh_discretize(sys.a_mat, sys.b_mat, ts_s)
    return DiscreteStateSpace(ad_mat=ad, bd_mat=bd, ts_s=ts_s)
