"""TOML configuration and scenario loading.

One config file carries the trirotor geometry, controller gains, mode
parameters, feasibility grids, simulator settings, the humanoid link tree,
and named poses. Scenario files describe a mode schedule, waypoints, and the
initial state; gait trajectories are CSV files referenced by path.

Parse failures raise :class:`ConfigError` naming the offending field.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # python < 3.11
    import tomli as tomllib

from .control import GainSet, ModeParams
from .feasibility import FeasibilityConfig
from .kinematics import FootGeometry, HumanoidModel, JointVector, Link
from .model import LocomotionMode, TrirotorGeometry
from .sim import GaitTrajectory, Phase, Scenario, SensorNoise, SimConfig, Waypoint

_AXES = {
    "x": np.array([1.0, 0.0, 0.0]),
    "y": np.array([0.0, 1.0, 0.0]),
    "z": np.array([0.0, 0.0, 1.0]),
}


class ConfigError(ValueError):
    """A config or scenario file failed to parse or validate."""


def _load_toml(path) -> dict:
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"file not found: {path}")
    try:
        with open(path, "rb") as handle:
            return tomllib.load(handle)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: invalid TOML: {exc}") from exc


def _require(table: dict, key: str, context: str):
    if key not in table:
        raise ConfigError(f"{context}: missing required field {key!r}")
    return table[key]


@dataclass(frozen=True)
class AppConfig:
    """Everything loaded from one config file."""

    geometry: TrirotorGeometry
    gains: GainSet
    mode_params: ModeParams
    feasibility: FeasibilityConfig
    sim: SimConfig
    humanoid: HumanoidModel
    poses: dict[str, JointVector]


def load_config(path) -> AppConfig:
    data = _load_toml(path)
    context = str(path)
    try:
        geometry = _parse_geometry(_require(data, "geometry", context))
        gains = _parse_gains(_require(data, "gains", context))
        mode_params = _parse_modes(data.get("modes", {}))
        feasibility = _parse_feasibility(data.get("feasibility", {}))
        sim = _parse_sim(data.get("sim", {}))
        humanoid = _parse_humanoid(_require(data, "humanoid", context))
        poses = {
            name: humanoid.joint_vector(dict(table))
            for name, table in data.get("poses", {}).items()
        }
    except ConfigError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"{context}: {exc}") from exc
    return AppConfig(
        geometry=geometry,
        gains=gains,
        mode_params=mode_params,
        feasibility=feasibility,
        sim=sim,
        humanoid=humanoid,
        poses=poses,
    )


def _parse_geometry(table: dict) -> TrirotorGeometry:
    return TrirotorGeometry(
        l=float(_require(table, "l", "geometry")),
        h=float(_require(table, "h", "geometry")),
        d_f=float(_require(table, "d_f", "geometry")),
        d_r=float(_require(table, "d_r", "geometry")),
        mass=float(_require(table, "mass", "geometry")),
        inertia=np.asarray(_require(table, "inertia", "geometry"), dtype=float),
        lambda_min=float(table.get("lambda_min", 0.0)),
        lambda_max=float(table.get("lambda_max", 18.0)),
        alpha_min=float(table.get("alpha_min", -0.75 * math.pi)),
        alpha_max=float(table.get("alpha_max", 0.75 * math.pi)),
    )


def _parse_gains(table: dict) -> GainSet:
    return GainSet(
        attitude_p=_require(table, "attitude_p", "gains"),
        attitude_i=_require(table, "attitude_i", "gains"),
        attitude_d=_require(table, "attitude_d", "gains"),
        position_p=_require(table, "position_p", "gains"),
        position_i=_require(table, "position_i", "gains"),
        position_d=_require(table, "position_d", "gains"),
        wheel_z_p=float(table.get("wheel_z_p", 4.0)),
        wheel_z_i=float(table.get("wheel_z_i", 0.5)),
        wheel_z_d=float(table.get("wheel_z_d", 2.0)),
        force_feedback_gain=float(table.get("force_feedback_gain", 0.5)),
        integral_limit=float(table.get("integral_limit", 2.0)),
    )


def _parse_modes(table: dict) -> ModeParams:
    return ModeParams(
        alpha_stable=float(table.get("alpha_stable", ModeParams.alpha_stable)),
        beta_stable=float(table.get("beta_stable", ModeParams.beta_stable)),
        f_thresh=float(table.get("f_thresh", ModeParams.f_thresh)),
        control_dt=float(table.get("control_dt", ModeParams.control_dt)),
        leg_z_offset=float(table.get("leg_z_offset", ModeParams.leg_z_offset)),
    )


def _parse_feasibility(table: dict) -> FeasibilityConfig:
    span = float(table.get("theta_span", math.pi / 3))
    step = float(table.get("theta_step", 0.01))
    cfg = FeasibilityConfig.default(theta_span=span, theta_step=step)
    return FeasibilityConfig(
        theta_grid=cfg.theta_grid,
        tau_grid_resolution=float(table.get("tau_resolution", 0.01)),
        lambda_grid_points=int(table.get("lambda_grid_points", 25)),
        alpha_grid_points=int(table.get("alpha_grid_points", 25)),
    )


def _parse_sim(table: dict) -> SimConfig:
    noise_table = table.get("sensor_noise", {})
    noise = SensorNoise(
        position=float(noise_table.get("position", 0.0)),
        velocity=float(noise_table.get("velocity", 0.0)),
        euler=float(noise_table.get("euler", 0.0)),
        omega=float(noise_table.get("omega", 0.0)),
        force=float(noise_table.get("force", 0.0)),
    )
    return SimConfig(
        dt=float(table.get("dt", 1e-3)),
        duration=float(table.get("duration", 10.0)),
        contact_stiffness=float(table.get("contact_stiffness", 1e4)),
        contact_damping=float(table.get("contact_damping", 50.0)),
        rolling_friction_coefficient=float(table.get("rolling_friction", 0.8)),
        sensor_noise=noise,
        seed=int(table.get("seed", 0)),
    )


def _parse_axis(value, name: str):
    if value is None or value == "fixed":
        return None
    if isinstance(value, str):
        if value not in _AXES:
            raise ConfigError(f"link {name}: unknown axis {value!r} (use x/y/z/fixed)")
        return _AXES[value]
    return np.asarray(value, dtype=float)


def _parse_humanoid(table: dict) -> HumanoidModel:
    foot_table = _require(table, "foot", "humanoid")
    foot = FootGeometry(
        plate_length=float(_require(foot_table, "plate_length", "humanoid.foot")),
        plate_width=float(_require(foot_table, "plate_width", "humanoid.foot")),
        wheel_center=_require(foot_table, "wheel_center", "humanoid.foot"),
        wheel_radius=float(_require(foot_table, "wheel_radius", "humanoid.foot")),
    )
    links = []
    for entry in _require(table, "links", "humanoid"):
        name = _require(entry, "name", "humanoid.links")
        links.append(
            Link(
                name=name,
                parent=entry.get("parent"),
                axis=_parse_axis(entry.get("axis", "fixed"), name),
                offset=entry.get("offset", (0.0, 0.0, 0.0)),
                mass=float(entry.get("mass", 0.0)),
                cog=entry.get("cog", (0.0, 0.0, 0.0)),
                limits=tuple(entry.get("limits", (-math.pi, math.pi))),
            )
        )
    return HumanoidModel(
        links=tuple(links),
        foot=foot,
        left_foot=table.get("left_foot", "left_foot"),
        right_foot=table.get("right_foot", "right_foot"),
        torso=table.get("torso", "torso"),
        flight_mount=table.get("flight_mount", "flight_mount"),
        clutch_joint=table.get("clutch_joint", "flight_mount"),
    )


def load_scenario(path, model: HumanoidModel | None = None) -> Scenario:
    """Load a scenario file; gait CSV paths resolve relative to the file."""
    data = _load_toml(path)
    context = str(path)
    base = Path(path).parent
    try:
        phases = []
        for entry in _require(data, "phases", context):
            mode_name = _require(entry, "mode", f"{context} phases")
            try:
                mode = LocomotionMode(mode_name)
            except ValueError as exc:
                raise ConfigError(
                    f"{context}: unknown mode {mode_name!r} "
                    f"(use aerial/legged/wheeled)"
                ) from exc
            gait = None
            if "gait" in entry:
                gait = GaitTrajectory.from_csv(base / entry["gait"])
            phases.append(
                Phase(
                    start=float(entry.get("start", 0.0)),
                    mode=mode,
                    pose=entry.get("pose"),
                    gait=gait,
                    f_thresh=float(entry["f_thresh"]) if "f_thresh" in entry else None,
                )
            )
        waypoints = tuple(
            Waypoint(
                t=float(entry.get("t", 0.0)),
                position=entry["position"],
                yaw=float(entry["yaw"]) if "yaw" in entry else None,
            )
            for entry in data.get("waypoints", [])
        )
        initial = data.get("initial", {})
        scenario = Scenario(
            name=str(data.get("name", Path(path).stem)),
            duration=float(_require(data, "duration", context)),
            phases=tuple(phases),
            waypoints=waypoints,
            control_dt=float(data.get("control_dt", 0.01)),
            seed=int(data["seed"]) if "seed" in data else None,
            initial_position=initial.get("position", (0.0, 0.0, 0.0)),
            initial_euler=initial.get("euler", (0.0, 0.0, 0.0)),
            initial_velocity=initial.get("velocity", (0.0, 0.0, 0.0)),
            initial_omega=initial.get("omega", (0.0, 0.0, 0.0)),
            start_on_ground=bool(data.get("start_on_ground", False)),
        )
    except ConfigError:
        raise
    except (KeyError, TypeError, ValueError, OSError) as exc:
        raise ConfigError(f"{context}: {exc}") from exc
    if model is not None:
        for phase in scenario.phases:
            if phase.gait is not None and phase.gait.angles.shape[1] != len(model.joint_names):
                raise ConfigError(
                    f"{context}: gait has {phase.gait.angles.shape[1]} joint columns, "
                    f"model has {len(model.joint_names)} joints"
                )
    return scenario


def preset_path(name: str) -> Path:
    """Path of a bundled preset config/scenario file."""
    path = Path(__file__).parent / "presets" / name
    if not path.exists():
        raise ConfigError(f"no bundled preset named {name!r}")
    return path
