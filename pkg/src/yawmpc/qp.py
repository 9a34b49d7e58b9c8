"""Dense strictly convex quadratic programming by a primal active-set method.

Solves min 0.5 z'Hz + f'z subject to Gz <= h for small dense problems with a
symmetric positive definite H. The method walks between working sets,
solving one equality-constrained subproblem per iteration, and terminates
finitely for nondegenerate problems. All tie-breaking is by lowest
constraint index, so repeated solves of the same problem are bit-identical.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import linprog

STATUS_OPTIMAL = "optimal"
STATUS_MAX_ITERATIONS = "max-iterations"

_SYM_TOL = 1e-12
_FEAS_TOL = 1e-9
_STEP_TOL = 1e-9
_DUAL_TOL = 1e-11
_DATA_MAX = 1e100


@dataclass(frozen=True)
class QpProblem:
    """min 0.5 z'Hz + f'z  s.t.  Gz <= h."""

    h_mat: np.ndarray
    f_vec: np.ndarray
    g_mat: np.ndarray
    h_vec: np.ndarray

    def __post_init__(self):
        h_mat = np.asarray(self.h_mat, dtype=float)
        n = h_mat.shape[0]
        if h_mat.shape != (n, n):
            raise ValueError("h_mat must be square")
        if np.max(np.abs(h_mat - h_mat.T)) > _SYM_TOL * max(1.0, np.max(np.abs(h_mat))):
            raise ValueError("h_mat must be symmetric")
        try:
            np.linalg.cholesky(h_mat)
        except np.linalg.LinAlgError:
            raise ValueError("h_mat must be positive definite") from None
        if self.f_vec.shape != (n,):
            raise ValueError("f_vec length must match h_mat")
        if self.g_mat.ndim != 2 or self.g_mat.shape[1] != n:
            raise ValueError("g_mat must have one column per decision variable")
        if self.h_vec.shape != (self.g_mat.shape[0],):
            raise ValueError("h_vec length must match g_mat rows")
        for name in ("h_mat", "f_vec", "g_mat", "h_vec"):
            if not np.all(np.isfinite(getattr(self, name))):
                raise ValueError(f"{name} contains non-finite values")

    @property
    def n_vars(self) -> int:
        return self.h_mat.shape[0]


@dataclass(frozen=True)
class QpSolution:
    z_vec: np.ndarray
    objective: float
    iterations: int
    status: str


def _objective(problem: QpProblem, z: np.ndarray) -> float:
    with np.errstate(over="ignore", invalid="ignore"):
        return float(0.5 * z @ problem.h_mat @ z + problem.f_vec @ z)


def _feasible(problem: QpProblem, z: np.ndarray) -> bool:
    tol = _FEAS_TOL * np.maximum(1.0, np.abs(problem.h_vec))
    with np.errstate(invalid="ignore"):
        return bool(np.all(problem.g_mat @ z <= problem.h_vec + tol))


def _phase_one_point(problem: QpProblem) -> np.ndarray:
    # Last-resort feasible point; never reached by the controller, whose
    # problems always admit z = 0.
    res = linprog(
        c=np.zeros(problem.n_vars),
        A_ub=problem.g_mat,
        b_ub=problem.h_vec,
        bounds=[(None, None)] * problem.n_vars,
        method="highs",
    )
    if not res.success:
        raise ValueError("constraint set is infeasible")
    return np.asarray(res.x, dtype=float)


def solve_qp(
    problem: QpProblem,
    max_iterations: int = 100,
    z0: np.ndarray | None = None,
) -> QpSolution:
    """Solve a strictly convex inequality-constrained QP.

    ``z0`` may supply a feasible warm start (e.g. the previous solution).
    When omitted, the solver tries the unconstrained minimizer, then the
    origin, then a linear-programming feasibility phase.

    The decision variables are Jacobi-equilibrated internally (scaled by
    1/sqrt(diag(H))) so that mixed-unit problems, where variable scales can
    differ by several orders of magnitude, iterate with commensurate
    tolerances. The reported solution is in the original variables.
    """
    n = problem.n_vars

    # Tolerances are unreachable for astronomically scaled data; refuse to
    # certify instead of iterating on garbage arithmetic.
    data_peak = max(
        np.max(np.abs(problem.f_vec), initial=0.0),
        np.max(np.abs(problem.h_vec), initial=0.0),
    )
    if data_peak > _DATA_MAX:
        return QpSolution(np.zeros(n), math.inf, 0, STATUS_MAX_ITERATIONS)

    z_unc = np.linalg.solve(problem.h_mat, -problem.f_vec)
    if _feasible(problem, z_unc):
        return QpSolution(z_unc, _objective(problem, z_unc), 1, STATUS_OPTIMAL)

    if z0 is not None and _feasible(problem, np.asarray(z0, dtype=float)):
        z_start = np.asarray(z0, dtype=float).copy()
    elif _feasible(problem, np.zeros(n)):
        z_start = np.zeros(n)
    else:
        z_start = _phase_one_point(problem)

    scale = 1.0 / np.sqrt(np.diag(problem.h_mat))
    h_mat = problem.h_mat * np.outer(scale, scale)
    f_vec = problem.f_vec * scale
    g_mat = problem.g_mat * scale
    h_vec = problem.h_vec
    row_norm = np.maximum(np.linalg.norm(g_mat, axis=1), 1e-30)
    g_mat = g_mat / row_norm[:, None]
    h_vec = h_vec / row_norm

    z = z_start / scale
    working: list[int] = []
    iterations = 0
    while iterations < max_iterations:
        iterations += 1
        grad = h_mat @ z + f_vec
        try:
            if len(working) == n:
                # Vertex: n independent active rows pin the point, so the
                # step is structurally zero and only the multipliers matter.
                gw = g_mat[working]
                step = np.zeros(n)
                lam = np.linalg.solve(gw.T, -grad)
            elif working:
                gw = g_mat[working]
                k = len(working)
                kkt = np.zeros((n + k, n + k))
                kkt[:n, :n] = h_mat
                kkt[:n, n:] = gw.T
                kkt[n:, :n] = gw
                rhs = np.concatenate([-grad, np.zeros(k)])
                sol = np.linalg.solve(kkt, rhs)
                step = sol[:n]
                lam = sol[n:]
            else:
                step = np.linalg.solve(h_mat, -grad)
                lam = np.empty(0)
        except np.linalg.LinAlgError:
            # Overflow-scale data can degrade the working set; report a
            # certification failure instead of crashing the caller.
            break
        if not (np.all(np.isfinite(step)) and np.all(np.isfinite(lam))):
            break

        if np.max(np.abs(step), initial=0.0) <= _STEP_TOL * (1.0 + float(np.linalg.norm(z))):
            if lam.size == 0 or np.min(lam) >= -_DUAL_TOL * (1.0 + float(np.max(np.abs(lam)))):
                z_out = z * scale
                if not _feasible(problem, z_out):
                    break
                return QpSolution(z_out, _objective(problem, z_out), iterations, STATUS_OPTIMAL)
            # Drop the most negative multiplier; ties resolved by the lowest
            # constraint index through argmin on the multiplier vector.
            drop_pos = int(np.argmin(lam))
            working.pop(drop_pos)
            continue

        # Ratio test against constraints outside the working set.
        alpha = 1.0
        blocking = -1
        g_step = g_mat @ step
        residual = h_vec - g_mat @ z
        for i in range(g_mat.shape[0]):
            if i in working or g_step[i] <= 1e-14:
                continue
            ratio = residual[i] / g_step[i]
            if ratio < 0.0:
                ratio = 0.0
            if ratio < alpha - 1e-15:
                alpha = ratio
                blocking = i
        z = z + alpha * step
        if blocking >= 0:
            working.append(blocking)

    z_out = z * scale
    return QpSolution(z_out, _objective(problem, z_out), iterations, STATUS_MAX_ITERATIONS)
