"""Velocity-scheduled model-predictive upper controller.

At each tick the controller picks a prebuilt prediction model by measured
speed, condenses the finite-horizon tracking problem into a small dense QP
over input increments, solves it, and applies the first increment
(receding horizon). The two inputs are the front steering angle and the
corrective yaw moment.

Decision vector: z = [du_0; ...; du_{Nc-1}], one 2-vector per control-horizon
step. Inputs are held at their last value beyond the control horizon.
Predicted states over the prediction horizon are affine in z, which makes
the cost quadratic and the amplitude/rate bounds linear in z:

* rate bounds apply to each block of z directly,
* amplitude bounds become cumulative-sum constraints
  u_prev + sum_{j<=i} du_j within [u_min, u_max].

With the increment weight positive definite, the condensed Hessian is
positive definite and z = 0 is always feasible, so the QP always has a
unique solution.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .linear_model import DiscreteStateSpace, discretize_zoh, linearize
from .qp import QpProblem, QpSolution, STATUS_OPTIMAL, solve_qp
from .vehicle import VehicleParams

DELTA_F_BOUND_RAD = math.radians(15.0)
DELTA_F_RATE_BOUND_RAD = math.radians(1.0)
YAW_MOMENT_BOUND_NM = 10000.0
YAW_MOMENT_RATE_BOUND_NM = 100.0

# (lower speed bound, upper speed bound, design speed of the prediction model)
SPEED_SCHEDULE: tuple[tuple[float, float, float], ...] = (
    (0.0, 25.0, 20.0),
    (25.0, 35.0, 30.0),
    (35.0, 45.0, 40.0),
    (45.0, 55.0, 50.0),
    (55.0, 65.0, 60.0),
    (65.0, math.inf, 70.0),
)


class ControllerFault(RuntimeError):
    """Raised when the QP solver fails to certify optimality."""


def _default_q() -> np.ndarray:
    return np.diag([500.0, 2000.0])


def _default_ru() -> np.ndarray:
    return np.diag([1e-2, 1e-9])


def _default_rdu() -> np.ndarray:
    return np.diag([1e-1, 1e-7])


def _default_u_min() -> np.ndarray:
    return np.array([-DELTA_F_BOUND_RAD, -YAW_MOMENT_BOUND_NM])


def _default_u_max() -> np.ndarray:
    return np.array([DELTA_F_BOUND_RAD, YAW_MOMENT_BOUND_NM])


def _default_du_min() -> np.ndarray:
    return np.array([-DELTA_F_RATE_BOUND_RAD, -YAW_MOMENT_RATE_BOUND_NM])


def _default_du_max() -> np.ndarray:
    return np.array([DELTA_F_RATE_BOUND_RAD, YAW_MOMENT_RATE_BOUND_NM])


@dataclass(frozen=True)
class MpcConfig:
    """Horizons, weights and bounds of the upper controller.

    The moment input spans roughly 1e4 N*m while the steering input spans
    1e-1 rad, so the default moment weights are smaller by the square of
    that scale ratio to give both channels comparable authority.
    """

    pred_horizon: int = 15
    ctrl_horizon: int = 2
    ts_s: float = 0.001
    q_weights: np.ndarray = field(default_factory=_default_q)
    ru_weights: np.ndarray = field(default_factory=_default_ru)
    rdu_weights: np.ndarray = field(default_factory=_default_rdu)
    u_min: np.ndarray = field(default_factory=_default_u_min)
    u_max: np.ndarray = field(default_factory=_default_u_max)
    du_min: np.ndarray = field(default_factory=_default_du_min)
    du_max: np.ndarray = field(default_factory=_default_du_max)

    def __post_init__(self):
        if not 1 <= self.ctrl_horizon <= self.pred_horizon:
            raise ValueError("need 1 <= ctrl_horizon <= pred_horizon")
        if self.ts_s <= 0.0:
            raise ValueError("ts_s must be > 0")
        for name in ("q_weights", "ru_weights", "rdu_weights"):
            w = np.asarray(getattr(self, name), dtype=float)
            if w.shape != (2, 2) or np.max(np.abs(w - w.T)) > 1e-12:
                raise ValueError(f"{name} must be a symmetric 2x2 matrix")
            eigs = np.linalg.eigvalsh(w)
            if name == "rdu_weights":
                if eigs[0] <= 0.0:
                    raise ValueError("rdu_weights must be positive definite")
            elif eigs[0] < -1e-12:
                raise ValueError(f"{name} must be positive semidefinite")
        for lo_name, hi_name in (("u_min", "u_max"), ("du_min", "du_max")):
            lo = np.asarray(getattr(self, lo_name), dtype=float)
            hi = np.asarray(getattr(self, hi_name), dtype=float)
            if lo.shape != (2,) or hi.shape != (2,):
                raise ValueError("input bounds must be 2-vectors")
            if not np.all(lo < hi):
                raise ValueError(f"{lo_name} must be < {hi_name} componentwise")
        if not (np.all(self.du_min <= 0.0) and np.all(self.du_max >= 0.0)):
            raise ValueError("zero increment must be feasible")


@dataclass(frozen=True)
class ControlCommand:
    """Upper-controller output: front steering angle and yaw moment."""

    delta_f_rad: float
    yaw_moment_nm: float

    def as_array(self) -> np.ndarray:
        return np.array([self.delta_f_rad, self.yaw_moment_nm])


@dataclass(frozen=True)
class BankEntry:
    """One scheduled controller: speed interval plus condensed matrices."""

    speed_lo: float
    speed_hi: float
    model_speed: float
    model: DiscreteStateSpace
    h_mat: np.ndarray  # condensed QP Hessian, constant per entry
    phi: np.ndarray  # free-state prediction map, (2*Np, 2)
    f_map: np.ndarray  # held-previous-input prediction map, (2*Np, 2)
    g_map: np.ndarray  # increment-to-state prediction map, (2*Np, 2*Nc)
    gtq: np.ndarray  # g_map' * blockdiag(Q), (2*Nc, 2*Np)
    sru: np.ndarray  # sum_i S_i' R_u, (2*Nc, 2)
    g_con: np.ndarray  # constraint matrix, rows ordered as documented below
    config: MpcConfig

    def contains(self, speed_mps: float) -> bool:
        return self.speed_lo <= speed_mps < self.speed_hi


@dataclass(frozen=True)
class ControllerBank:
    entries: tuple[BankEntry, ...]


def _cumulative_selectors(n_ctrl: int) -> list[np.ndarray]:
    """S_i with u_i = u_prev + S_i z; inputs hold beyond the control horizon."""
    selectors = []
    for i in range(n_ctrl):
        s = np.zeros((2, 2 * n_ctrl))
        for j in range(i + 1):
            s[:, 2 * j : 2 * j + 2] = np.eye(2)
        selectors.append(s)
    return selectors


def _build_entry(
    lo: float, hi: float, model_speed: float, params: VehicleParams, config: MpcConfig
) -> BankEntry:
    model = discretize_zoh(linearize(params, model_speed, mu=1.0), config.ts_s)
    ad = model.ad_mat
    bd = model.bd_mat
    n_pred = config.pred_horizon
    n_ctrl = config.ctrl_horizon
    nz = 2 * n_ctrl

    powers = [np.eye(2)]
    for _ in range(n_pred):
        powers.append(powers[-1] @ ad)

    selectors = _cumulative_selectors(n_ctrl)
    held = selectors[-1]

    phi = np.zeros((2 * n_pred, 2))
    f_map = np.zeros((2 * n_pred, 2))
    g_map = np.zeros((2 * n_pred, nz))
    for i in range(1, n_pred + 1):
        row = slice(2 * (i - 1), 2 * i)
        phi[row] = powers[i]
        acc_f = np.zeros((2, 2))
        acc_g = np.zeros((2, nz))
        for j in range(i):
            ab = powers[i - 1 - j] @ bd
            acc_f += ab
            acc_g += ab @ (selectors[j] if j < n_ctrl else held)
        f_map[row] = acc_f
        g_map[row] = acc_g

    q_bar = np.kron(np.eye(n_pred), np.asarray(config.q_weights, dtype=float))
    rdu_bar = np.kron(np.eye(n_ctrl), np.asarray(config.rdu_weights, dtype=float))
    ru = np.asarray(config.ru_weights, dtype=float)

    gtq = g_map.T @ q_bar
    s_ru_s = np.zeros((nz, nz))
    sru = np.zeros((nz, 2))
    for s in selectors:
        s_ru_s += s.T @ ru @ s
        sru += s.T @ ru
    h_mat = 2.0 * (gtq @ g_map + rdu_bar + s_ru_s)
    h_mat = 0.5 * (h_mat + h_mat.T)

    # Constraint rows: increment upper bounds, increment lower bounds,
    # cumulative amplitude upper bounds, cumulative amplitude lower bounds.
    eye_z = np.eye(nz)
    s_stack = np.vstack(selectors)
    g_con = np.vstack([eye_z, -eye_z, s_stack, -s_stack])

    return BankEntry(
        speed_lo=lo,
        speed_hi=hi,
        model_speed=model_speed,
        model=model,
        h_mat=h_mat,
        phi=phi,
        f_map=f_map,
        g_map=g_map,
        gtq=gtq,
        sru=sru,
        g_con=g_con,
        config=config,
    )


def build_bank(params: VehicleParams, config: MpcConfig | None = None) -> ControllerBank:
    """Precompute one condensed controller per speed interval."""
    config = config or MpcConfig()
    entries = tuple(
        _build_entry(lo, hi, model_speed, params, config)
        for lo, hi, model_speed in SPEED_SCHEDULE
    )
    return ControllerBank(entries=entries)


def select_controller(bank: ControllerBank, speed_mps: float) -> BankEntry:
    """Pure threshold scheduling, lower interval bound inclusive."""
    if speed_mps < 0.0 or not math.isfinite(speed_mps):
        raise ValueError("speed_mps must be finite and >= 0")
    for entry in bank.entries:
        if entry.contains(speed_mps):
            return entry
    raise AssertionError("speed intervals must cover [0, inf)")


def _reference_stack(entry: BankEntry, x_ref_traj: np.ndarray) -> np.ndarray:
    n_pred = entry.config.pred_horizon
    ref = np.asarray(x_ref_traj, dtype=float)
    if ref.shape == (2,):
        return np.tile(ref, n_pred)
    if ref.shape == (n_pred, 2):
        return ref.reshape(-1)
    raise ValueError("x_ref_traj must be a 2-vector or a (pred_horizon, 2) array")


def condense(
    entry: BankEntry,
    x_now: np.ndarray,
    x_ref_traj: np.ndarray,
    u_prev: np.ndarray,
) -> QpProblem:
    """Assemble the QP over input increments for the current measurements."""
    config = entry.config
    x_now = np.asarray(x_now, dtype=float)
    u_prev = np.asarray(u_prev, dtype=float)
    if np.any(u_prev < config.u_min - 1e-9) or np.any(u_prev > config.u_max + 1e-9):
        raise ValueError("u_prev must lie within the input bounds")

    ref_flat = _reference_stack(entry, x_ref_traj)
    free_error = entry.phi @ x_now + entry.f_map @ u_prev - ref_flat
    f_vec = 2.0 * (entry.gtq @ free_error + entry.sru @ u_prev)

    n_ctrl = config.ctrl_horizon
    h_vec = np.concatenate(
        [
            np.tile(config.du_max, n_ctrl),
            np.tile(-config.du_min, n_ctrl),
            np.tile(config.u_max - u_prev, n_ctrl),
            np.tile(u_prev - config.u_min, n_ctrl),
        ]
    )
    return QpProblem(h_mat=entry.h_mat, f_vec=f_vec, g_mat=entry.g_con, h_vec=h_vec)


def mpc_step(
    bank: ControllerBank,
    x_now: np.ndarray,
    x_ref_traj: np.ndarray,
    u_prev: np.ndarray,
    speed_mps: float,
    max_iterations: int = 100,
) -> ControlCommand:
    """One receding-horizon update: returns u_prev plus the first increment."""
    entry = select_controller(bank, speed_mps)
    problem = condense(entry, x_now, x_ref_traj, u_prev)
    solution: QpSolution = solve_qp(problem, max_iterations=max_iterations)
    if solution.status != STATUS_OPTIMAL:
        raise ControllerFault(
            f"qp did not certify optimality within {max_iterations} iterations"
        )
    u_prev = np.asarray(u_prev, dtype=float)
    u_next = u_prev + solution.z_vec[:2]
    return ControlCommand(delta_f_rad=float(u_next[0]), yaw_moment_nm=float(u_next[1]))
