"""Command-line entry point.

Subcommands: ``allocate`` (wrench to rotor commands), ``optimize-pitch``
(feasible-torque curve and optimal pitch), ``simulate`` (scenario run with a
CSV trace), and ``clutch`` (pose-dependent clutch angle).

Exit codes: 0 ok, 1 input error, 2 infeasible, 3 simulation divergence.
"""

from __future__ import annotations

import argparse
import dataclasses
import math
import sys

import numpy as np

from .allocation import WrenchAllocator, rotor_commands_from_lambda
from .config import ConfigError, load_config, load_scenario
from .feasibility import (
    FeasibilityError,
    desired_clutch_angle,
    is_wrench_feasible,
    optimize_pitch_angle,
)
from .kinematics import cog_projection, distance_to_polygon, support_polygon, torso_orientation
from .model import LocomotionMode, Wrench
from .sim import SimulationDiverged, run_scenario

EXIT_OK = 0
EXIT_INPUT_ERROR = 1
EXIT_INFEASIBLE = 2
EXIT_DIVERGED = 3


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="trivec",
        description="Thrust-vectoring trirotor allocation, feasibility, and simulation tools.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_alloc = sub.add_parser("allocate", help="map a desired wrench to rotor commands")
    p_alloc.add_argument("--config", required=True, help="config file (TOML)")
    p_alloc.add_argument(
        "wrench", nargs=6, type=float, metavar=("FX", "FY", "FZ", "TX", "TY", "TZ")
    )

    p_opt = sub.add_parser("optimize-pitch", help="feasible-torque curve and optimal pitch")
    p_opt.add_argument("--config", required=True)
    p_opt.add_argument("--out", help="CSV file for the (theta, tau_min, tau_max) curve")

    p_sim = sub.add_parser("simulate", help="run a scenario and write the trace CSV")
    p_sim.add_argument("--scenario", required=True)
    p_sim.add_argument("--config", required=True)
    p_sim.add_argument("--out", required=True, help="trace CSV path")
    p_sim.add_argument("--seed", type=int, help="override the scenario seed")
    p_sim.add_argument("--duration", type=float, help="override the scenario duration (s)")

    p_clutch = sub.add_parser("clutch", help="clutch angle for a pose, or invalid-pose report")
    p_clutch.add_argument("--config", required=True)
    group = p_clutch.add_mutually_exclusive_group(required=True)
    group.add_argument("--pose", help="named pose from the config")
    group.add_argument("--q", help="comma-separated joint angles (rad)")
    p_clutch.add_argument(
        "--mode",
        default="legged",
        choices=[m.value for m in LocomotionMode],
    )
    p_clutch.add_argument(
        "--theta-flight-unit",
        type=float,
        default=0.0,
        help="optimal flight-unit pitch (rad), default 0",
    )
    return parser


def cmd_allocate(args) -> int:
    cfg = load_config(args.config)
    values = np.asarray(args.wrench, dtype=float)
    if not np.all(np.isfinite(values)):
        raise ConfigError("wrench components must be finite")
    wrench = Wrench(force=values[:3], torque=values[3:])
    allocator = WrenchAllocator(cfg.geometry)
    commands = rotor_commands_from_lambda(allocator.allocate(wrench))
    feasible = is_wrench_feasible(cfg.geometry, wrench, allocator=allocator)
    for i, cmd in enumerate(commands, start=1):
        print(f"rotor {i}: thrust {cmd.magnitude:.4f} N, angle {cmd.vectoring_angle:.4f} rad")
    print(f"feasible: {'yes' if feasible else 'no'}")
    return EXIT_OK if feasible else EXIT_INFEASIBLE


def cmd_optimize_pitch(args) -> int:
    cfg = load_config(args.config)
    try:
        theta_star, curve = optimize_pitch_angle(
            cfg.geometry, cfg.geometry.mass, cfg.feasibility
        )
    except FeasibilityError as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    if args.out:
        with open(args.out, "w") as handle:
            handle.write("theta,tau_min,tau_max\n")
            for entry in curve:
                handle.write(f"{entry.theta!r},{entry.tau_min!r},{entry.tau_max!r}\n")
    print(f"theta_star = {theta_star:.2f} rad")
    return EXIT_OK


def cmd_simulate(args) -> int:
    cfg = load_config(args.config)
    scenario = load_scenario(args.scenario, model=cfg.humanoid)
    overrides = {}
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.duration is not None:
        overrides["duration"] = args.duration
    if overrides:
        scenario = dataclasses.replace(scenario, **overrides)
    try:
        trace = run_scenario(
            scenario,
            cfg.geometry,
            cfg.humanoid,
            cfg.gains,
            cfg.sim,
            mode_params=dataclasses.replace(cfg.mode_params, control_dt=scenario.control_dt),
            poses=cfg.poses,
        )
    except SimulationDiverged as exc:
        print(f"diverged: {exc}", file=sys.stderr)
        return EXIT_DIVERGED
    trace.write_csv(args.out)
    _print_simulation_summary(scenario, cfg, trace)
    return EXIT_OK


def _print_simulation_summary(scenario, cfg, trace) -> None:
    print(f"scenario: {scenario.name}  ticks: {trace.data.shape[0]}")
    if scenario.waypoints:
        target = scenario.waypoints[-1].position
        err = np.abs(trace.data[-1, 1:4] - target)
        print(f"final position error: {np.max(err):.5f} m")
    az = trace.column("a_z_cmd")
    print(f"max |a_z| command: {np.max(np.abs(az)):.4f} m/s^2")
    print(f"saturated ticks: {int(np.sum(trace.column('saturated') > 0))}")
    wheeled = trace.rows_in_mode(LocomotionMode.WHEELED)
    if wheeled.any():
        force = trace.column("f_contact")[wheeled]
        tail = force[-max(1, force.size // 10):]
        f_thresh = next(
            (p.f_thresh for p in reversed(scenario.phases) if p.f_thresh is not None),
            cfg.mode_params.f_thresh,
        )
        err = np.max(np.abs(tail - f_thresh)) / f_thresh
        print(f"wheel contact force error (steady state): {100.0 * err:.2f} %")


def cmd_clutch(args) -> int:
    cfg = load_config(args.config)
    model = cfg.humanoid
    if args.pose is not None:
        if args.pose not in cfg.poses:
            raise ConfigError(
                f"pose {args.pose!r} not in config (available: {sorted(cfg.poses)})"
            )
        q = cfg.poses[args.pose]
    else:
        try:
            values = [float(v) for v in args.q.replace(",", " ").split()]
        except ValueError as exc:
            raise ConfigError(f"--q must be numeric joint angles: {exc}") from exc
        q = model.joint_vector(values)
    mode = LocomotionMode(args.mode)
    angle = desired_clutch_angle(model, q, mode, args.theta_flight_unit)
    if angle is None:
        polygon = support_polygon(model, q, mode)
        cog = cog_projection(model, q)
        distance = distance_to_polygon(polygon, cog)
        print("invalid pose: CoG projection outside the support polygon")
        print(f"  CoG projection: ({cog[0]:.4f}, {cog[1]:.4f}) m")
        print(f"  polygon ({polygon.kind}): {polygon.vertices.tolist()}")
        print(f"  distance to polygon: {distance:.4f} m")
        return EXIT_OK
    pitch = torso_orientation(model, q)[1]
    print(f"theta_torso = {math.degrees(pitch):.3f} deg")
    print(f"theta_clutch = {math.degrees(angle):.3f} deg ({angle:.5f} rad)")
    return EXIT_OK


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    handlers = {
        "allocate": cmd_allocate,
        "optimize-pitch": cmd_optimize_pitch,
        "simulate": cmd_simulate,
        "clutch": cmd_clutch,
    }
    try:
        return handlers[args.command](args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT_ERROR


if __name__ == "__main__":
    sys.exit(main())
