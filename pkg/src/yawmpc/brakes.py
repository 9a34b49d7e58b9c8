"""Rule-based lower controller: wheel selection and brake-torque computation.

The upper controller's corrective yaw moment is realized by braking a single
wheel. Which wheel depends only on the signs and ordering of the measured
and desired yaw rates (six cases); the torque follows from the lever arm of
the braking force about the CG.

For a front wheel the braking force acts along the steered wheel heading,
so the lever arm is sin(theta -/+ delta_f) * sqrt(l_f^2 + (w_f/2)^2) with
theta = arctan((w_f/2)/l_f); the steering angle enters with opposite sign on
the right wheel (mirror geometry). For a rear wheel the arm reduces to the
half track exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

from .vehicle import VehicleParams

DEFAULT_DEADBAND_RADPS = 0.005
DEFAULT_MAX_TORQUE_NM = 5000.0

_SINGULARITY_EPS = 1e-6


class Wheel(str, Enum):
    FL = "FL"
    FR = "FR"
    RL = "RL"
    RR = "RR"
    NONE = "none"


class BrakeGeometryError(ValueError):
    """Front lever arm degenerate: steering angle too close to the wheel bearing."""


@dataclass(frozen=True)
class BrakeCommand:
    wheel: Wheel
    torque_nm: float

    def __post_init__(self):
        if self.torque_nm < 0.0:
            raise ValueError("brake torque must be nonnegative")
        if (self.wheel is Wheel.NONE) != (self.torque_nm == 0.0):
            raise ValueError("wheel is none exactly when torque is zero")


def select_wheel(
    r: float, r_d: float, deadband: float = DEFAULT_DEADBAND_RADPS
) -> Wheel:
    """Pick the braking wheel from the yaw-rate cases.

    Returns NONE inside the deadband. Outside it, the first matching case
    wins (the cases are mutually exclusive away from boundaries):

    1. r > 0,  r_d >= 0, r_d < r  -> FR
    2. r >= 0, r_d > 0,  r_d > r  -> RL
    3. r < 0,  r_d >= 0           -> FL
    4. r > 0,  r_d < 0            -> FR
    5. r <= 0, r_d < 0,  r_d < r  -> RR
    6. r < 0,  r_d < 0,  r_d > r  -> FL
    """
    if not (math.isfinite(r) and math.isfinite(r_d)):
        raise ValueError("yaw rates must be finite")
    if deadband < 0.0:
        raise ValueError("deadband must be >= 0")
    if abs(r_d - r) <= deadband:
        return Wheel.NONE
    if r > 0.0 and r_d >= 0.0 and r_d < r:
        return Wheel.FR
    if r >= 0.0 and r_d > 0.0 and r_d > r:
        return Wheel.RL
    if r < 0.0 and r_d >= 0.0:
        return Wheel.FL
    if r > 0.0 and r_d < 0.0:
        return Wheel.FR
    if r <= 0.0 and r_d < 0.0 and r_d < r:
        return Wheel.RR
    if r < 0.0 and r_d < 0.0 and r_d > r:
        return Wheel.FL
    raise AssertionError("yaw-rate cases must be exhaustive")


def _front_lever_arm(wheel: Wheel, delta_f: float, params: VehicleParams) -> float:
    half_track = 0.5 * params.track_front
    bearing = math.atan2(half_track, params.dist_front)
    # Mirror symmetry: positive steering shortens the left arm, lengthens
    # the right one.
    if wheel is Wheel.FL:
        angle = bearing - delta_f
    else:
        angle = bearing + delta_f
    return math.sin(angle) * math.hypot(params.dist_front, half_track)


def _rear_lever_arm(params: VehicleParams) -> float:
    half_track = 0.5 * params.track_rear
    bearing = math.atan2(half_track, params.dist_rear)
    return math.sin(bearing) * math.hypot(params.dist_rear, half_track)


def brake_torque(
    m_corr: float,
    wheel: Wheel,
    delta_f: float,
    params: VehicleParams,
    max_torque_nm: float = DEFAULT_MAX_TORQUE_NM,
) -> float:
    """Brake torque realizing |m_corr| through the given wheel.

    Clamped to [0, max_torque_nm]; the clamp models the actuator limit.
    """
    if not (math.isfinite(m_corr) and math.isfinite(delta_f)):
        raise ValueError("inputs must be finite")
    if wheel is Wheel.NONE:
        return 0.0
    if wheel in (Wheel.FL, Wheel.FR):
        arm = _front_lever_arm(wheel, delta_f, params)
        if arm <= _SINGULARITY_EPS:
            raise BrakeGeometryError(
                "front lever arm vanished; steering angle too close to the wheel bearing angle"
            )
    else:
        arm = _rear_lever_arm(params)
    torque = abs(m_corr) * params.wheel_radius / arm
    return min(torque, max_torque_nm)


def reconstruct_moment(
    cmd: BrakeCommand, delta_f: float, params: VehicleParams
) -> float:
    """Yaw moment about the CG produced by a brake command.

    The braking force cmd.torque / wheel_radius acts opposite the wheel
    heading at the wheel position; the returned moment carries the sign
    implied by the wheel side and the steering geometry.
    """
    if cmd.wheel is Wheel.NONE:
        return 0.0
    force = cmd.torque_nm / params.wheel_radius
    if cmd.wheel in (Wheel.FL, Wheel.FR):
        x_w = params.dist_front
        y_w = 0.5 * params.track_front if cmd.wheel is Wheel.FL else -0.5 * params.track_front
        fx = -force * math.cos(delta_f)
        fy = -force * math.sin(delta_f)
    else:
        x_w = -params.dist_rear
        y_w = 0.5 * params.track_rear if cmd.wheel is Wheel.RL else -0.5 * params.track_rear
        fx = -force
        fy = 0.0
    return x_w * fy - y_w * fx


def allocate(
    m_corr: float,
    r: float,
    r_d: float,
    delta_f: float,
    params: VehicleParams,
    deadband: float = DEFAULT_DEADBAND_RADPS,
    pair: bool = False,
    max_torque_nm: float = DEFAULT_MAX_TORQUE_NM,
) -> list[BrakeCommand]:
    """Full lower-controller step: wheel selection plus torque computation.

    With ``pair`` enabled the moment is split evenly between the front and
    rear wheels of the selected side instead of braking a single wheel.
    """
    wheel = select_wheel(r, r_d, deadband)
    if wheel is Wheel.NONE or m_corr == 0.0:
        return [BrakeCommand(Wheel.NONE, 0.0)]
    if not pair:
        torque = brake_torque(m_corr, wheel, delta_f, params, max_torque_nm)
        if torque == 0.0:
            return [BrakeCommand(Wheel.NONE, 0.0)]
        return [BrakeCommand(wheel, torque)]
    side_pairs = {
        Wheel.FR: (Wheel.FR, Wheel.RR),
        Wheel.RR: (Wheel.FR, Wheel.RR),
        Wheel.FL: (Wheel.FL, Wheel.RL),
        Wheel.RL: (Wheel.FL, Wheel.RL),
    }
    commands = []
    for w in side_pairs[wheel]:
        torque = brake_torque(0.5 * m_corr, w, delta_f, params, max_torque_nm)
        commands.append(BrakeCommand(w, torque) if torque > 0.0 else BrakeCommand(Wheel.NONE, 0.0))
    return commands
