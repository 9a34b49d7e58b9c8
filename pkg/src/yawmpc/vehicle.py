"""Nonlinear single-track vehicle plant used as the simulation truth model.

Sign conventions follow ISO 8855: x forward, y left, yaw positive
counter-clockwise. Sideslip is the angle from the body x-axis to the
velocity vector at the CG; axle slip angles use the same sense.

Two axle lateral-force laws are available:

* ``saturating`` -- a magic-formula-style curve whose slope at the origin
  equals mu times the axle cornering stiffness and whose magnitude never
  exceeds mu times the static axle load. This is the default plant law.
* ``linear`` -- force proportional to slip angle with mu-scaled stiffness
  and no force limit. Still a nonlinear plant overall (trigonometric
  kinematics remain); used by the bundled validation scenarios.

Both laws have the same origin slope, so the plant linearizes to the same
small-signal state space either way.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

TIRE_SHAPE_FACTOR = 1.3

TIRE_LAW_SATURATING = "saturating"
TIRE_LAW_LINEAR = "linear"
TIRE_LAWS = (TIRE_LAW_SATURATING, TIRE_LAW_LINEAR)


@dataclass(frozen=True)
class VehicleParams:
    """Physical constants of the single-track model, SI units.

    Defaults are a mid-size passenger car. Track widths, wheel radius,
    steering ratio and gravity only enter the brake allocator, the
    driver-input scaling and the static axle loads.
    """

    mass_kg: float = 1321.0
    c_front: float = 72500.0  # front axle cornering stiffness [N/rad]
    c_rear: float = 92500.0  # rear axle cornering stiffness [N/rad]
    yaw_inertia: float = 2120.0  # [kg m^2]
    dist_front: float = 1.07  # CG to front axle [m]
    dist_rear: float = 1.53  # CG to rear axle [m]
    track_front: float = 1.50  # [m]
    track_rear: float = 1.50  # [m]
    wheel_radius: float = 0.30  # effective rolling radius [m]
    steering_ratio: float = 16.0  # steering wheel to road wheel [-]
    gravity: float = 9.81  # [m/s^2]

    def __post_init__(self):
        for name in (
            "mass_kg",
            "c_front",
            "c_rear",
            "yaw_inertia",
            "dist_front",
            "dist_rear",
            "track_front",
            "track_rear",
            "wheel_radius",
            "steering_ratio",
            "gravity",
        ):
            value = getattr(self, name)
            if not math.isfinite(value) or value <= 0.0:
                raise ValueError(f"{name} must be finite and > 0, got {value!r}")
        if self.steering_ratio < 1.0:
            raise ValueError("steering_ratio must be >= 1")

    @property
    def wheelbase(self) -> float:
        return self.dist_front + self.dist_rear

    @property
    def front_axle_load_n(self) -> float:
        """Static front axle normal load."""
        return self.mass_kg * self.gravity * self.dist_rear / self.wheelbase

    @property
    def rear_axle_load_n(self) -> float:
        """Static rear axle normal load."""
        return self.mass_kg * self.gravity * self.dist_front / self.wheelbase


@dataclass(frozen=True)
class VehicleState:
    """Planar vehicle state: lateral dynamics plus global pose."""

    sideslip_rad: float = 0.0
    yaw_rate_radps: float = 0.0
    speed_mps: float = 20.0
    pos_x_m: float = 0.0
    pos_y_m: float = 0.0
    heading_rad: float = 0.0

    def __post_init__(self):
        fields = (
            self.sideslip_rad,
            self.yaw_rate_radps,
            self.speed_mps,
            self.pos_x_m,
            self.pos_y_m,
            self.heading_rad,
        )
        if not all(math.isfinite(v) for v in fields):
            raise ValueError("vehicle state contains non-finite values")
        if self.speed_mps <= 0.0:
            raise ValueError("speed_mps must be > 0 (model singular at rest)")


@dataclass(frozen=True)
class TireForce:
    """Lateral force state of one axle."""

    slip_angle_rad: float
    lateral_force_n: float
    normal_load_n: float


class StateDerivatives(NamedTuple):
    """Time derivatives of the vehicle state (speed derivative is zero)."""

    d_sideslip: float
    d_yaw_rate: float
    d_speed: float
    d_pos_x: float
    d_pos_y: float
    d_heading: float


def axle_slip_angles(
    state: VehicleState, delta_f: float, params: VehicleParams
) -> tuple[float, float]:
    """Front and rear axle slip angles for the current motion state."""
    if not math.isfinite(delta_f):
        raise ValueError("delta_f must be finite")
    v = state.speed_mps
    alpha_front = delta_f - state.sideslip_rad - params.dist_front * state.yaw_rate_radps / v
    alpha_rear = -state.sideslip_rad + params.dist_rear * state.yaw_rate_radps / v
    return alpha_front, alpha_rear


def tire_lateral_force(alpha: float, c_alpha: float, f_z: float, mu: float) -> float:
    """Saturating axle lateral force.

    D*sin(C*arctan(B*alpha)) with D = mu*f_z and B chosen so the slope at
    alpha = 0 is exactly mu*c_alpha. The magnitude never exceeds mu*f_z.
    """
    if not math.isfinite(alpha):
        raise ValueError("alpha must be finite")
    if c_alpha <= 0.0 or f_z <= 0.0:
        raise ValueError("c_alpha and f_z must be > 0")
    if not 0.0 < mu <= 1.0:
        raise ValueError("mu must be in (0, 1]")
    b = c_alpha / (TIRE_SHAPE_FACTOR * f_z)
    return mu * f_z * math.sin(TIRE_SHAPE_FACTOR * math.atan(b * alpha))


def linear_tire_force(alpha: float, c_alpha: float, mu: float) -> float:
    """Unsaturated axle lateral force: mu-scaled cornering stiffness."""
    if not math.isfinite(alpha):
        raise ValueError("alpha must be finite")
    return mu * c_alpha * alpha


def axle_tire_forces(
    state: VehicleState,
    delta_f: float,
    mu: float,
    params: VehicleParams,
    tire_law: str = TIRE_LAW_SATURATING,
) -> tuple[TireForce, TireForce]:
    """Per-axle lateral forces under static axle loads."""
    alpha_f, alpha_r = axle_slip_angles(state, delta_f, params)
    f_zf = params.front_axle_load_n
    f_zr = params.rear_axle_load_n
    if tire_law == TIRE_LAW_SATURATING:
        f_yf = tire_lateral_force(alpha_f, params.c_front, f_zf, mu)
        f_yr = tire_lateral_force(alpha_r, params.c_rear, f_zr, mu)
    elif tire_law == TIRE_LAW_LINEAR:
        f_yf = linear_tire_force(alpha_f, params.c_front, mu)
        f_yr = linear_tire_force(alpha_r, params.c_rear, mu)
    else:
        raise ValueError(f"unknown tire law {tire_law!r}")
    return (
        TireForce(alpha_f, f_yf, f_zf),
        TireForce(alpha_r, f_yr, f_zr),
    )


def _derivatives_raw(
    beta: float,
    yaw_rate: float,
    heading: float,
    speed: float,
    delta_f: float,
    m_corr: float,
    m_dist: float,
    mu: float,
    params: VehicleParams,
    tire_law: str,
) -> tuple[float, float, float, float, float]:
    """Scalar fast path shared by the public API and the integrator."""
    alpha_f = delta_f - beta - params.dist_front * yaw_rate / speed
    alpha_r = -beta + params.dist_rear * yaw_rate / speed
    if tire_law == TIRE_LAW_SATURATING:
        f_zf = params.front_axle_load_n
        f_zr = params.rear_axle_load_n
        bf = params.c_front / (TIRE_SHAPE_FACTOR * f_zf)
        br = params.c_rear / (TIRE_SHAPE_FACTOR * f_zr)
        f_yf = mu * f_zf * math.sin(TIRE_SHAPE_FACTOR * math.atan(bf * alpha_f))
        f_yr = mu * f_zr * math.sin(TIRE_SHAPE_FACTOR * math.atan(br * alpha_r))
    else:
        f_yf = mu * params.c_front * alpha_f
        f_yr = mu * params.c_rear * alpha_r
    cos_d = math.cos(delta_f)
    d_beta = (f_yf * cos_d + f_yr) / (params.mass_kg * speed) - yaw_rate
    d_yaw = (
        params.dist_front * f_yf * cos_d
        - params.dist_rear * f_yr
        + m_corr
        + m_dist
    ) / params.yaw_inertia
    course = heading + beta
    return (
        d_beta,
        d_yaw,
        speed * math.cos(course),
        speed * math.sin(course),
        yaw_rate,
    )


def plant_derivatives(
    state: VehicleState,
    delta_f: float,
    m_corr: float,
    m_dist: float,
    mu: float,
    params: VehicleParams,
    tire_law: str = TIRE_LAW_SATURATING,
) -> StateDerivatives:
    """State derivatives of the nonlinear plant.

    Speed is held constant (zero derivative); the corrective yaw moment
    and any disturbance moment act directly on the yaw balance.
    """
    if not all(math.isfinite(v) for v in (delta_f, m_corr, m_dist, mu)):
        raise ValueError("plant inputs must be finite")
    if abs(delta_f) >= math.pi / 2:
        raise ValueError("front steering angle must satisfy |delta_f| < pi/2")
    if tire_law not in TIRE_LAWS:
        raise ValueError(f"unknown tire law {tire_law!r}")
    d_beta, d_yaw, d_x, d_y, d_psi = _derivatives_raw(
        state.sideslip_rad,
        state.yaw_rate_radps,
        state.heading_rad,
        state.speed_mps,
        delta_f,
        m_corr,
        m_dist,
        mu,
        params,
        tire_law,
    )
    return StateDerivatives(d_beta, d_yaw, 0.0, d_x, d_y, d_psi)


def integrate_step(
    state: VehicleState,
    delta_f: float,
    m_corr: float,
    m_dist: float,
    mu: float,
    params: VehicleParams,
    dt: float,
    tire_law: str = TIRE_LAW_SATURATING,
    substeps: int = 1,
) -> VehicleState:
    """Advance the plant by ``dt`` with classical fixed-step RK4.

    Inputs are held constant over the interval. ``substeps`` splits the
    interval for step-size convergence checks; the default of one substep
    matches the controller tick.
    """
    if dt <= 0.0:
        raise ValueError("dt must be > 0")
    if substeps < 1:
        raise ValueError("substeps must be >= 1")
    beta = state.sideslip_rad
    yaw = state.yaw_rate_radps
    speed = state.speed_mps
    x = state.pos_x_m
    y = state.pos_y_m
    psi = state.heading_rad
    h = dt / substeps
    for _ in range(substeps):
        k1 = _derivatives_raw(beta, yaw, psi, speed, delta_f, m_corr, m_dist, mu, params, tire_law)
        k2 = _derivatives_raw(
            beta + 0.5 * h * k1[0],
            yaw + 0.5 * h * k1[1],
            psi + 0.5 * h * k1[4],
            speed,
            delta_f,
            m_corr,
            m_dist,
            mu,
            params,
            tire_law,
        )
        k3 = _derivatives_raw(
            beta + 0.5 * h * k2[0],
            yaw + 0.5 * h * k2[1],
            psi + 0.5 * h * k2[4],
            speed,
            delta_f,
            m_corr,
            m_dist,
            mu,
            params,
            tire_law,
        )
        k4 = _derivatives_raw(
            beta + h * k3[0],
            yaw + h * k3[1],
            psi + h * k3[4],
            speed,
            delta_f,
            m_corr,
            m_dist,
            mu,
            params,
            tire_law,
        )
        beta += h * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]) / 6.0
        yaw += h * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]) / 6.0
        x += h * (k1[2] + 2.0 * k2[2] + 2.0 * k3[2] + k4[2]) / 6.0
        y += h * (k1[3] + 2.0 * k2[3] + 2.0 * k3[3] + k4[3]) / 6.0
        psi += h * (k1[4] + 2.0 * k2[4] + 2.0 * k3[4] + k4[4]) / 6.0
    return VehicleState(beta, yaw, speed, x, y, psi)
