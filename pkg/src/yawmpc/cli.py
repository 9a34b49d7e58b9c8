"""Command-line front end: scenario files in, CSV/metrics/plots out.

Scenario files are flat text, one ``key = value`` per line, ``#`` comments.
Recognized keys: speed_mps, mu, steer_deg, steer_time_s, dist_nm,
dist_time_s, duration_s, tire_model, steer_rate_dps, substeps,
brake_deadband.

Overrides via ``--set`` use the bare scenario keys, ``mpc.<key>`` for
controller settings (ts_s, pred_horizon, ctrl_horizon, q_beta, q_r,
ru_delta, ru_moment, rdu_delta, rdu_moment) and ``veh.<field>`` for vehicle
parameters.

Exit codes: 0 success, 2 usage or scenario-file error, 3 simulation fault.
"""

from __future__ import annotations

import argparse
import dataclasses
import os
import sys
import tempfile
from concurrent.futures import ThreadPoolExecutor
from importlib import resources
from pathlib import Path

import numpy as np

from .brakes import Wheel
from .mpc import MpcConfig
from .sim import (
    PiecewiseConstant,
    Scenario,
    SimRecord,
    SimulationFault,
    compare_runs,
    run_metrics,
    run_scenario,
)
from .vehicle import VehicleParams

OUT_DIR_ENV = "YAWMPC_OUT"

CSV_HEADER = "t,beta,r,beta_ref,r_ref,delta_f_cmd,M_cmd,delta_f_driver,wheel,T_brake,X,Y,psi"

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_FAULT = 3

_SCENARIO_FLOAT_KEYS = {
    "speed_mps",
    "mu",
    "steer_deg",
    "steer_time_s",
    "dist_nm",
    "dist_time_s",
    "duration_s",
    "steer_rate_dps",
    "brake_deadband",
}
_SCENARIO_KEYS = _SCENARIO_FLOAT_KEYS | {"tire_model", "substeps"}

_MPC_WEIGHT_KEYS = {
    "q_beta": ("q_weights", 0),
    "q_r": ("q_weights", 1),
    "ru_delta": ("ru_weights", 0),
    "ru_moment": ("ru_weights", 1),
    "rdu_delta": ("rdu_weights", 0),
    "rdu_moment": ("rdu_weights", 1),
}
_MPC_SCALAR_KEYS = {"ts_s": float, "pred_horizon": int, "ctrl_horizon": int}


class ScenarioError(ValueError):
    """Unusable scenario file or override."""


def bundled_scenario_path(name: str) -> Path:
    """Path of a scenario shipped with the package (s1, s2, s3)."""
    resource = resources.files("yawmpc").joinpath(f"scenarios/{name}.scn")
    if not resource.is_file():
        raise ScenarioError(f"no bundled scenario named {name!r}")
    return Path(str(resource))


def parse_scenario_text(text: str, source: str = "<string>") -> dict[str, str]:
    values: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ScenarioError(f"{source}:{lineno}: expected 'key = value', got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in _SCENARIO_KEYS:
            raise ScenarioError(f"{source}:{lineno}: unknown key {key!r}")
        values[key] = value
    return values


def scenario_from_mapping(values: dict[str, str]) -> Scenario:
    parsed: dict[str, object] = {}
    for key, value in values.items():
        if key in _SCENARIO_FLOAT_KEYS:
            try:
                parsed[key] = float(value)
            except ValueError:
                raise ScenarioError(f"key {key!r}: expected a number, got {value!r}") from None
        elif key == "substeps":
            try:
                parsed[key] = int(value)
            except ValueError:
                raise ScenarioError(f"key {key!r}: expected an integer, got {value!r}") from None
        else:
            parsed[key] = value
    try:
        return Scenario(
            initial_speed_mps=parsed.get("speed_mps", 20.0),
            mu=parsed.get("mu", 1.0),
            steer_profile=PiecewiseConstant.step(
                parsed.get("steer_time_s", 0.0), parsed.get("steer_deg", 0.0)
            ),
            disturbance_profile=PiecewiseConstant.step(
                parsed.get("dist_time_s", 0.0), parsed.get("dist_nm", 0.0)
            ),
            duration_s=parsed.get("duration_s", 5.0),
            tire_law=parsed.get("tire_model", "linear"),
            steer_rate_limit_dps=parsed.get("steer_rate_dps", 0.0),
            plant_substeps=parsed.get("substeps", 1),
            brake_deadband_radps=parsed.get("brake_deadband", 0.005),
        )
    except ValueError as exc:
        raise ScenarioError(str(exc)) from None


def load_scenario(path_or_name: str) -> tuple[Scenario, str, dict[str, str]]:
    """Returns (scenario, stem, raw key mapping)."""
    path = Path(path_or_name)
    if not path.is_file():
        path = bundled_scenario_path(path_or_name)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ScenarioError(f"cannot read scenario file: {exc}") from None
    values = parse_scenario_text(text, source=str(path))
    return scenario_from_mapping(values), path.stem, values


def parse_overrides(pairs: list[str]) -> dict[str, str]:
    out = {}
    for pair in pairs:
        if "=" not in pair:
            raise ScenarioError(f"override {pair!r} must look like key=value")
        key, value = pair.split("=", 1)
        out[key.strip()] = value.strip()
    return out


def apply_overrides(
    values: dict[str, str], overrides: dict[str, str]
) -> tuple[Scenario, MpcConfig, VehicleParams]:
    scenario_values = dict(values)
    mpc_kwargs: dict[str, object] = {}
    weight_diags = {
        "q_weights": [500.0, 2000.0],
        "ru_weights": [1e-2, 1e-9],
        "rdu_weights": [1e-1, 1e-7],
    }
    weights_touched = set()
    veh_kwargs: dict[str, float] = {}
    veh_fields = {f.name for f in dataclasses.fields(VehicleParams)}
    for key, value in overrides.items():
        if key.startswith("mpc."):
            name = key[4:]
            if name in _MPC_SCALAR_KEYS:
                try:
                    mpc_kwargs[name] = _MPC_SCALAR_KEYS[name](value)
                except ValueError:
                    raise ScenarioError(f"override {key!r}: bad number {value!r}") from None
            elif name in _MPC_WEIGHT_KEYS:
                target, idx = _MPC_WEIGHT_KEYS[name]
                try:
                    weight_diags[target][idx] = float(value)
                except ValueError:
                    raise ScenarioError(f"override {key!r}: bad number {value!r}") from None
                weights_touched.add(target)
            else:
                raise ScenarioError(f"unknown controller override {key!r}")
        elif key.startswith("veh."):
            name = key[4:]
            if name not in veh_fields:
                raise ScenarioError(f"unknown vehicle override {key!r}")
            try:
                veh_kwargs[name] = float(value)
            except ValueError:
                raise ScenarioError(f"override {key!r}: bad number {value!r}") from None
        elif key in _SCENARIO_KEYS:
            scenario_values[key] = value
        else:
            raise ScenarioError(f"unknown override key {key!r}")
    for target in weights_touched:
        mpc_kwargs[target] = np.diag(weight_diags[target])
    try:
        config = MpcConfig(**mpc_kwargs)
        params = VehicleParams(**veh_kwargs)
    except ValueError as exc:
        raise ScenarioError(str(exc)) from None
    return scenario_from_mapping(scenario_values), config, params


def format_value(value: float) -> str:
    return f"{value:.9g}"


def records_to_csv(records: list[SimRecord]) -> str:
    lines = [CSV_HEADER]
    for rec in records:
        lines.append(
            ",".join(
                (
                    format_value(rec.t),
                    format_value(rec.beta),
                    format_value(rec.r),
                    format_value(rec.beta_ref),
                    format_value(rec.r_ref),
                    format_value(rec.delta_f_cmd),
                    format_value(rec.m_cmd),
                    format_value(rec.delta_f_driver),
                    rec.wheel.value,
                    format_value(rec.t_brake),
                    format_value(rec.x),
                    format_value(rec.y),
                    format_value(rec.psi),
                )
            )
        )
    return "\n".join(lines) + "\n"


def read_csv(path: Path) -> list[SimRecord]:
    lines = path.read_text().splitlines()
    if not lines or lines[0] != CSV_HEADER:
        raise ScenarioError(f"{path}: unexpected CSV header")
    records = []
    for line in lines[1:]:
        cols = line.split(",")
        records.append(
            SimRecord(
                t=float(cols[0]),
                beta=float(cols[1]),
                r=float(cols[2]),
                beta_ref=float(cols[3]),
                r_ref=float(cols[4]),
                delta_f_cmd=float(cols[5]),
                m_cmd=float(cols[6]),
                delta_f_driver=float(cols[7]),
                wheel=Wheel(cols[8]),
                t_brake=float(cols[9]),
                x=float(cols[10]),
                y=float(cols[11]),
                psi=float(cols[12]),
            )
        )
    return records


def _write_atomic(path: Path, content: str) -> None:
    fd, tmp_name = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as handle:
            handle.write(content)
        os.replace(tmp_name, path)
    except BaseException:
        if os.path.exists(tmp_name):
            os.unlink(tmp_name)
        raise


def event_window_start(scenario: Scenario) -> float:
    """First time any input becomes active; metrics are evaluated from there."""
    starts = []
    for profile in (scenario.steer_profile, scenario.disturbance_profile):
        for t, v in zip(profile.times, profile.values):
            if v != 0.0:
                starts.append(t)
                break
    return min(starts) if starts else 0.0


def _metrics_text(
    scenario: Scenario,
    controlled: list[SimRecord] | None,
    uncontrolled: list[SimRecord] | None,
) -> str:
    window = event_window_start(scenario)
    lines = [f"evaluation_window_start_s = {format_value(window)}"]
    if controlled is not None and uncontrolled is not None:
        comparison = compare_runs(controlled, uncontrolled, window)
        for label, metrics in (
            ("controlled", comparison.controlled),
            ("uncontrolled", comparison.uncontrolled),
        ):
            for name, value in dataclasses.asdict(metrics).items():
                lines.append(f"{label}.{name} = {format_value(value)}")
        for name, value in comparison.ratios().items():
            lines.append(f"ratio.{name} = {format_value(value)}")
    else:
        records = controlled if controlled is not None else uncontrolled
        label = "controlled" if controlled is not None else "uncontrolled"
        for name, value in dataclasses.asdict(run_metrics(records, window)).items():
            lines.append(f"{label}.{name} = {format_value(value)}")
    return "\n".join(lines) + "\n"


def _resolve_out_dir(arg: str | None) -> Path:
    if arg:
        return Path(arg)
    return Path(os.environ.get(OUT_DIR_ENV, "."))


def cmd_simulate(args: argparse.Namespace) -> int:
    try:
        scenario, stem, values = load_scenario(args.scenario)
        overrides = parse_overrides(args.set or [])
        scenario, config, params = apply_overrides(values, overrides)
    except ScenarioError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE

    out_dir = _resolve_out_dir(args.out)
    run_controlled = not args.uncontrolled_only
    run_uncontrolled = not args.controlled_only

    controlled = uncontrolled = None
    try:
        if run_controlled:
            controlled = run_scenario(scenario, params, config)
        if run_uncontrolled:
            uncontrolled = run_scenario(scenario.uncontrolled(), params, config)
    except SimulationFault as fault:
        print(f"simulation fault: {fault}", file=sys.stderr)
        return EXIT_FAULT

    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    if controlled is not None:
        path = out_dir / f"{stem}_controlled.csv"
        _write_atomic(path, records_to_csv(controlled))
        written.append(path)
    if uncontrolled is not None:
        path = out_dir / f"{stem}_uncontrolled.csv"
        _write_atomic(path, records_to_csv(uncontrolled))
        written.append(path)
    metrics_path = out_dir / "metrics.txt"
    _write_atomic(metrics_path, _metrics_text(scenario, controlled, uncontrolled))
    written.append(metrics_path)
    if args.plot:
        from .plots import save_standard_plots

        written.extend(save_standard_plots(out_dir, stem, controlled, uncontrolled))
    for path in written:
        print(path)
    return EXIT_OK


def _parse_grid_axis(text: str, what: str) -> list[float]:
    try:
        values = [float(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise ScenarioError(f"bad {what} list {text!r}") from None
    if not values:
        raise ScenarioError(f"{what} list is empty")
    return values


_SWEEP_HEADER = (
    "speed_mps,mu,status,"
    "controlled_peak_yaw_error,controlled_ss_yaw_error,controlled_peak_sideslip,controlled_settling_time_s,"
    "uncontrolled_peak_yaw_error,uncontrolled_ss_yaw_error,uncontrolled_peak_sideslip,uncontrolled_settling_time_s,"
    "ss_yaw_error_ratio"
)


def _sweep_cell(
    scenario: Scenario, params: VehicleParams, config: MpcConfig, speed: float, mu_value: float
) -> str:
    cell = dataclasses.replace(scenario, initial_speed_mps=speed, mu=mu_value)
    prefix = f"{format_value(speed)},{format_value(mu_value)}"
    try:
        controlled = run_scenario(cell, params, config)
        uncontrolled = run_scenario(cell.uncontrolled(), params, config)
    except SimulationFault:
        return f"{prefix},fault" + ",nan" * 9
    comparison = compare_runs(controlled, uncontrolled, event_window_start(cell))
    fields = [prefix, "ok"]
    for metrics in (comparison.controlled, comparison.uncontrolled):
        fields.extend(
            format_value(v)
            for v in (
                metrics.peak_yaw_error,
                metrics.ss_yaw_error,
                metrics.peak_sideslip,
                metrics.settling_time_s,
            )
        )
    fields.append(format_value(comparison.ratios()["ss_yaw_error"]))
    return ",".join(fields)


def cmd_sweep(args: argparse.Namespace) -> int:
    try:
        scenario, stem, values = load_scenario(args.scenario)
        overrides = parse_overrides(args.set or [])
        scenario, config, params = apply_overrides(values, overrides)
        speeds = _parse_grid_axis(args.speeds, "speed")
        mus = _parse_grid_axis(args.mus, "mu")
    except ScenarioError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE

    cells = [(speed, mu_value) for speed in speeds for mu_value in mus]
    jobs = max(1, min(args.jobs, len(cells)))
    if jobs == 1:
        rows = [_sweep_cell(scenario, params, config, s, m) for s, m in cells]
    else:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            futures = [pool.submit(_sweep_cell, scenario, params, config, s, m) for s, m in cells]
            rows = [future.result() for future in futures]

    out_dir = _resolve_out_dir(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / f"{stem}_sweep.csv"
    _write_atomic(path, "\n".join([_SWEEP_HEADER, *rows]) + "\n")
    print(path)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="yawmpc",
        description="closed-loop yaw-stability simulations: MPC steering plus single-wheel braking",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="run one scenario and write CSV/metrics/plots")
    sim.add_argument("scenario", help="scenario file path or bundled name (s1, s2, s3)")
    sim.add_argument("--out", help=f"output directory (default: ${OUT_DIR_ENV} or .)")
    group = sim.add_mutually_exclusive_group()
    group.add_argument("--uncontrolled-only", action="store_true")
    group.add_argument("--controlled-only", action="store_true")
    sim.add_argument("--plot", action="store_true", help="also write SVG figures")
    sim.add_argument("--set", action="append", metavar="KEY=VALUE", help="override scenario/mpc/vehicle settings")
    sim.set_defaults(func=cmd_simulate)

    sweep = sub.add_parser("sweep", help="run a scenario over a (speed, mu) grid")
    sweep.add_argument("scenario", help="scenario file path or bundled name")
    sweep.add_argument("--speeds", required=True, help="comma-separated initial speeds [m/s]")
    sweep.add_argument("--mus", required=True, help="comma-separated friction coefficients")
    sweep.add_argument("--out", help=f"output directory (default: ${OUT_DIR_ENV} or .)")
    sweep.add_argument("--jobs", type=int, default=4, help="worker threads (default 4)")
    sweep.add_argument("--set", action="append", metavar="KEY=VALUE")
    sweep.set_defaults(func=cmd_sweep)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
