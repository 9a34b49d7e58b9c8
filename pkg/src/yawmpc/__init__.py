"""Integrated vehicle yaw-stability control.

A velocity-scheduled model-predictive upper controller commands front
steering and a corrective yaw moment; a rule-based lower controller maps
the moment to a single-wheel brake torque; a nonlinear single-track plant
closes the loop.
"""

from .brakes import (
    BrakeCommand,
    BrakeGeometryError,
    Wheel,
    allocate,
    brake_torque,
    reconstruct_moment,
    select_wheel,
)
from .linear_model import (
    ContinuousStateSpace,
    DiscreteStateSpace,
    discretize_zoh,
    linearize,
    zoh_discretize,
)
from .mpc import (
    BankEntry,
    ControlCommand,
    ControllerBank,
    ControllerFault,
    MpcConfig,
    build_bank,
    condense,
    mpc_step,
    select_controller,
)
from .qp import QpProblem, QpSolution, solve_qp
from .reference import ReferenceState, reference_step, steady_state_gains
from .sim import (
    PiecewiseConstant,
    RunComparison,
    RunMetrics,
    Scenario,
    SimRecord,
    SimulationFault,
    compare_runs,
    run_metrics,
    run_scenario,
)
from .vehicle import (
    StateDerivatives,
    TireForce,
    VehicleParams,
    VehicleState,
    axle_slip_angles,
    axle_tire_forces,
    integrate_step,
    linear_tire_force,
    plant_derivatives,
    tire_lateral_force,
)

__version__ = "0.1.0"

__all__ = [
    "BankEntry",
    "BrakeCommand",
    "BrakeGeometryError",
    "ContinuousStateSpace",
    "ControlCommand",
    "ControllerBank",
    "ControllerFault",
    "DiscreteStateSpace",
    "MpcConfig",
    "PiecewiseConstant",
    "QpProblem",
    "QpSolution",
    "ReferenceState",
    "RunComparison",
    "RunMetrics",
    "Scenario",
    "SimRecord",
    "SimulationFault",
    "StateDerivatives",
    "TireForce",
    "VehicleParams",
    "VehicleState",
    "Wheel",
    "allocate",
    "axle_slip_angles",
    "axle_tire_forces",
    "brake_torque",
    "build_bank",
    "compare_runs",
    "condense",
    "discretize_zoh",
    "integrate_step",
    "linear_tire_force",
    "linearize",
    "mpc_step",
    "plant_derivatives",
    "reconstruct_moment",
    "reference_step",
    "run_metrics",
    "run_scenario",
    "select_controller",
    "select_wheel",
    "solve_qp",
    "steady_state_gains",
    "tire_lateral_force",
    "zoh_discretize",
]
