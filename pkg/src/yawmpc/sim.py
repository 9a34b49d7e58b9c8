"""Closed-loop simulation harness.

Runs the full control chain at the controller sample time: driver steering
through the steering ratio, reference generation, the MPC upper controller,
the brake allocator, and one RK4 plant step per tick. The plant consumes
the corrective yaw moment directly; brake commands are computed and logged
so the allocation chain is exercised, but braking is not fed back into the
longitudinal dynamics (speed stays constant).

The uncontrolled baseline applies driver steering only, with zero
corrective moment and no brake activity.
"""

from __future__ import annotations

import logging
import math
from bisect import bisect_right
from dataclasses import dataclass, field, replace

import numpy as np

from .brakes import DEFAULT_DEADBAND_RADPS, BrakeCommand, Wheel, allocate
from .mpc import ControlCommand, ControllerFault, MpcConfig, build_bank, mpc_step
from .reference import ReferenceState, reference_step
from .vehicle import TIRE_LAW_LINEAR, TIRE_LAWS, VehicleParams, VehicleState, integrate_step

log = logging.getLogger(__name__)


class SimulationFault(RuntimeError):
    """Numerical blow-up or other unrecoverable condition during a run."""

    def __init__(self, message: str, time_s: float):
        super().__init__(f"t={time_s:.4f}s: {message}")
        self.time_s = time_s


@dataclass(frozen=True)
class PiecewiseConstant:
    """Right-continuous piecewise-constant signal: value(t) holds from each breakpoint."""

    times: tuple[float, ...] = ()
    values: tuple[float, ...] = ()
    base: float = 0.0

    def __post_init__(self):
        if len(self.times) != len(self.values):
            raise ValueError("times and values must have equal length")
        if any(b < a for a, b in zip(self.times, self.times[1:])):
            raise ValueError("breakpoints must be nondecreasing")

    @classmethod
    def step(cls, time_s: float, amplitude: float) -> "PiecewiseConstant":
        if amplitude == 0.0:
            return cls()
        return cls(times=(time_s,), values=(amplitude,))

    def __call__(self, t: float) -> float:
        idx = bisect_right(self.times, t)
        if idx == 0:
            return self.base
        return self.values[idx - 1]


@dataclass(frozen=True)
class Scenario:
    """One closed-loop experiment definition."""

    initial_speed_mps: float = 20.0
    mu: float = 1.0
    steer_profile: PiecewiseConstant = field(default_factory=PiecewiseConstant)  # steering wheel [deg]
    disturbance_profile: PiecewiseConstant = field(default_factory=PiecewiseConstant)  # yaw moment [N*m]
    duration_s: float = 5.0
    controller_enabled: bool = True
    tire_law: str = TIRE_LAW_LINEAR
    steer_rate_limit_dps: float = 0.0  # 0 disables slew limiting of the wheel input
    plant_substeps: int = 1
    brake_deadband_radps: float = DEFAULT_DEADBAND_RADPS

    def __post_init__(self):
        if not 0.0 < self.mu <= 1.0:
            raise ValueError("mu must be in (0, 1]")
        if self.duration_s <= 0.0:
            raise ValueError("duration_s must be > 0")
        if self.initial_speed_mps <= 0.0:
            raise ValueError("initial_speed_mps must be > 0")
        if self.tire_law not in TIRE_LAWS:
            raise ValueError(f"unknown tire law {self.tire_law!r}")
        if self.steer_rate_limit_dps < 0.0:
            raise ValueError("steer_rate_limit_dps must be >= 0")
        if self.plant_substeps < 1:
            raise ValueError("plant_substeps must be >= 1")

    def uncontrolled(self) -> "Scenario":
        return replace(self, controller_enabled=False)


@dataclass(frozen=True)
class SimRecord:
    """One sample of the closed-loop time series."""

    t: float
    beta: float
    r: float
    beta_ref: float
    r_ref: float
    delta_f_cmd: float
    m_cmd: float
    delta_f_driver: float
    wheel: Wheel
    t_brake: float
    x: float
    y: float
    psi: float


def run_scenario(
    scenario: Scenario,
    params: VehicleParams | None = None,
    config: MpcConfig | None = None,
) -> list[SimRecord]:
    """Simulate one scenario; returns duration/ts + 1 records."""
    params = params or VehicleParams()
    config = config or MpcConfig()
    ts = config.ts_s
    n_steps = round(scenario.duration_s / ts)
    if n_steps < 1:
        raise ValueError("duration shorter than one sample")

    bank = build_bank(params, config) if scenario.controller_enabled else None
    state = VehicleState(speed_mps=scenario.initial_speed_mps)
    ref = ReferenceState()
    u_prev = np.zeros(2)
    wheel_angle_deg = 0.0  # slew-limited steering wheel angle
    records: list[SimRecord] = []

    for k in range(n_steps + 1):
        t = k * ts
        target_deg = scenario.steer_profile(t)
        if scenario.steer_rate_limit_dps > 0.0:
            max_move = scenario.steer_rate_limit_dps * ts
            wheel_angle_deg += min(max(target_deg - wheel_angle_deg, -max_move), max_move)
        else:
            wheel_angle_deg = target_deg
        delta_driver = math.radians(wheel_angle_deg) / params.steering_ratio

        ref = reference_step(ref, delta_driver, state.speed_mps, ts, params)

        if scenario.controller_enabled:
            x_now = np.array([state.sideslip_rad, state.yaw_rate_radps])
            x_ref = np.array([0.0, ref.r_ref_radps])
            try:
                cmd = mpc_step(bank, x_now, x_ref, u_prev, state.speed_mps)
            except ControllerFault as fault:
                log.warning("holding previous command at t=%.4f s: %s", t, fault)
                cmd = ControlCommand(float(u_prev[0]), float(u_prev[1]))
            u_prev = cmd.as_array()
            delta_total = delta_driver + cmd.delta_f_rad
            moment = cmd.yaw_moment_nm
            brake = allocate(
                moment,
                state.yaw_rate_radps,
                ref.r_ref_radps,
                delta_total,
                params,
                deadband=scenario.brake_deadband_radps,
            )[0]
        else:
            cmd = ControlCommand(0.0, 0.0)
            delta_total = delta_driver
            moment = 0.0
            brake = BrakeCommand(Wheel.NONE, 0.0)

        m_dist = scenario.disturbance_profile(t)
        records.append(
            SimRecord(
                t=t,
                beta=state.sideslip_rad,
                r=state.yaw_rate_radps,
                beta_ref=ref.beta_ref_rad,
                r_ref=ref.r_ref_radps,
                delta_f_cmd=cmd.delta_f_rad,
                m_cmd=moment if scenario.controller_enabled else 0.0,
                delta_f_driver=delta_driver,
                wheel=brake.wheel,
                t_brake=brake.torque_nm,
                x=state.pos_x_m,
                y=state.pos_y_m,
                psi=state.heading_rad,
            )
        )

        if k == n_steps:
            break
        try:
            state = integrate_step(
                state,
                delta_total,
                moment,
                m_dist,
                scenario.mu,
                params,
                ts,
                tire_law=scenario.tire_law,
                substeps=scenario.plant_substeps,
            )
        except ValueError as exc:
            raise SimulationFault(f"plant state left the valid domain ({exc})", t) from exc
        if not (
            math.isfinite(state.sideslip_rad)
            and math.isfinite(state.yaw_rate_radps)
            and math.isfinite(state.pos_x_m)
            and math.isfinite(state.pos_y_m)
            and math.isfinite(state.heading_rad)
        ):
            raise SimulationFault("plant state became non-finite", t)
    return records


@dataclass(frozen=True)
class RunMetrics:
    """Tracking statistics of one run over an evaluation window."""

    peak_yaw_error: float
    ss_yaw_error: float
    peak_sideslip: float
    settling_time_s: float


@dataclass(frozen=True)
class RunComparison:
    controlled: RunMetrics
    uncontrolled: RunMetrics

    def ratios(self) -> dict[str, float]:
        out = {}
        for name in ("peak_yaw_error", "ss_yaw_error", "peak_sideslip", "settling_time_s"):
            c = getattr(self.controlled, name)
            u = getattr(self.uncontrolled, name)
            if u == 0.0:
                out[name] = 1.0 if c == 0.0 else math.inf
            else:
                out[name] = c / u
        return out


def run_metrics(records: list[SimRecord], window_start_s: float = 0.0) -> RunMetrics:
    """Metrics over t >= window_start_s.

    Steady state is the mean over the final 10 percent of samples. Settling
    time is the time after the window start at which |r - r_ref| last
    leaves a band of 5 percent of its in-window peak (zero for an
    error-free run).
    """
    window = [rec for rec in records if rec.t >= window_start_s]
    if not window:
        raise ValueError("evaluation window is empty")
    err = np.array([abs(rec.r - rec.r_ref) for rec in window])
    beta = np.array([abs(rec.beta) for rec in window])
    tail = max(1, len(window) // 10)
    peak = float(err.max())
    if peak == 0.0:
        settling = 0.0
    else:
        above = np.nonzero(err > 0.05 * peak)[0]
        settling = 0.0 if above.size == 0 else window[int(above[-1])].t - window[0].t
    return RunMetrics(
        peak_yaw_error=peak,
        ss_yaw_error=float(err[-tail:].mean()),
        peak_sideslip=float(beta.max()),
        settling_time_s=settling,
    )


def compare_runs(
    controlled: list[SimRecord],
    uncontrolled: list[SimRecord],
    window_start_s: float = 0.0,
) -> RunComparison:
    """Side-by-side metrics of a controlled and an uncontrolled run."""
    if len(controlled) != len(uncontrolled):
        raise ValueError("runs must have equal length")
    return RunComparison(
        controlled=run_metrics(controlled, window_start_s),
        uncontrolled=run_metrics(uncontrolled, window_start_s),
    )
