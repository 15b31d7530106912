"""Deterministic 6-DOF rigid-body simulator with penalty ground contact.

The whole robot is integrated as a single rigid body (quasi-static joint
motion): semi-implicit Euler at the physics step, the controller running at
the slower control period, and ground contact as penalty springs at the
body-fixed foot/wheel points. Legged locomotion is driven quasi-statically:
the gait trajectory updates the kinematic targets while the rigid body
follows the flight controller.

Traces are deterministic for a fixed seed and written as CSV with a fixed,
versioned header.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from ._kernels_py import point_contact_force
from .allocation import WrenchAllocator, lambda_from_rotor_commands
from .control import (
    ControllerState,
    GainSet,
    ModeParams,
    SensorBundle,
    control_step,
    leg_mode_update,
    switch_mode,
)
from .kinematics import HumanoidModel, JointVector, contact_points_body
from .model import (
    GRAVITY,
    LocomotionMode,
    RigidBodyState,
    TrirotorGeometry,
    Wrench,
    euler_to_rotation,
)

FRICTION_VELOCITY_SCALE = 0.01  # m/s, Coulomb smoothing

_FRICTION_MODE = {
    LocomotionMode.AERIAL: 0,
    LocomotionMode.WHEELED: 1,
    LocomotionMode.LEGGED: 2,
}


class SimulationDiverged(RuntimeError):
    """The integrated state exceeded the sanity bound (simulation blew up)."""

    def __init__(self, tick: int, time: float):
        super().__init__(f"simulation diverged at tick {tick} (t={time:.3f} s)")
        self.tick = tick
        self.time = time


@dataclass(frozen=True)
class SensorNoise:
    """Per-channel gaussian noise standard deviations (all zero by default)."""

    position: float = 0.0
    velocity: float = 0.0
    euler: float = 0.0
    omega: float = 0.0
    force: float = 0.0

    def any(self) -> bool:
        return any(
            getattr(self, name) > 0.0
            for name in ("position", "velocity", "euler", "omega", "force")
        )


@dataclass(frozen=True)
class SimConfig:
    """Integration step, contact model, and sensor noise configuration."""

    dt: float = 1e-3
    duration: float = 10.0
    contact_stiffness: float = 1e4
    contact_damping: float = 50.0
    rolling_friction_coefficient: float = 0.8
    sensor_noise: SensorNoise = field(default_factory=SensorNoise)
    seed: int = 0

    def __post_init__(self):
        if self.dt <= 0:
            raise ValueError("dt must be positive")
        if self.duration <= 0:
            raise ValueError("duration must be positive")
        if self.contact_stiffness < 0 or self.contact_damping < 0:
            raise ValueError("contact stiffness and damping must be non-negative")


@dataclass(frozen=True)
class ContactState:
    """Per-point contact snapshot; ``sensor_force`` is the summed normal force."""

    points_world: np.ndarray  # (n, 3)
    penetrations: np.ndarray  # (n,)
    normal_forces: np.ndarray  # (n,)
    forces_world: np.ndarray  # (n, 3), normal plus friction
    in_contact: np.ndarray  # (n,) bool

    def __post_init__(self):
        if np.any(self.normal_forces < 0):
            raise ValueError("normal forces must be non-negative")

    @property
    def sensor_force(self) -> float:
        return float(np.sum(self.normal_forces))

    @classmethod
    def empty(cls) -> "ContactState":
        return cls(
            points_world=np.zeros((0, 3)),
            penetrations=np.zeros(0),
            normal_forces=np.zeros(0),
            forces_world=np.zeros((0, 3)),
            in_contact=np.zeros(0, dtype=bool),
        )


def contact_forces(
    state: RigidBodyState,
    model: HumanoidModel,
    q: JointVector,
    mode: LocomotionMode,
    cfg: SimConfig,
) -> ContactState:
    """Penalty contact forces at the pose's foot or wheel contact points.

    Wheeled mode resists lateral slip only (free rolling longitudinally);
    legged-static mode resists both horizontal directions.
    """
    points_body = contact_points_body(model, q, mode)
    return _contact_state(state, points_body, mode, cfg)


def _contact_state(
    state: RigidBodyState, points_body: np.ndarray, mode: LocomotionMode, cfg: SimConfig
) -> ContactState:
    friction_mode = _FRICTION_MODE[mode]
    n = points_body.shape[0]
    points_world = np.zeros((n, 3))
    penetrations = np.zeros(n)
    normals = np.zeros(n)
    forces = np.zeros((n, 3))
    omega_world = state.rotation @ state.angular_velocity
    for i, p_body in enumerate(points_body):
        arm = state.rotation @ p_body
        p_world = state.position + arm
        v_point = state.velocity + np.cross(omega_world, arm)
        force, normal = point_contact_force(
            p_world,
            v_point,
            cfg.contact_stiffness,
            cfg.contact_damping,
            cfg.rolling_friction_coefficient,
            friction_mode,
            FRICTION_VELOCITY_SCALE,
        )
        points_world[i] = p_world
        penetrations[i] = max(0.0, -p_world[2])
        normals[i] = normal
        forces[i] = force
    return ContactState(
        points_world=points_world,
        penetrations=penetrations,
        normal_forces=normals,
        forces_world=forces,
        in_contact=normals > 0.0,
    )


def dynamics_step(
    state: RigidBodyState,
    applied: Wrench,
    contacts: ContactState | None,
    mass: float,
    inertia: np.ndarray,
    dt: float,
) -> RigidBodyState:
    """One semi-implicit integration step under a body wrench and contact forces.

    ``contacts`` must have been evaluated at ``state`` (or be ``None`` for
    free flight). The rotation is advanced by the exponential map and
    re-orthonormalized. Raises :class:`SimulationDiverged` when the state
    leaves the sanity bound.
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    inertia = np.asarray(inertia, dtype=float).reshape(3, 3)
    if contacts is None or contacts.points_world.shape[0] == 0:
        f_contact = np.zeros(3)
        tau_contact = np.zeros(3)
    else:
        f_contact = contacts.forces_world.sum(axis=0)
        arms = contacts.points_world - state.position
        tau_contact = np.cross(arms, contacts.forces_world).sum(axis=0)

    accel = (state.rotation @ applied.force + f_contact) / mass
    accel[2] -= GRAVITY
    velocity = state.velocity + dt * accel
    position = state.position + dt * velocity

    omega = state.angular_velocity
    torque = (
        applied.torque
        - np.cross(omega, inertia @ omega)
        + state.rotation.T @ tau_contact
    )
    omega_new = omega + dt * np.linalg.solve(inertia, torque)
    rotation = state.rotation @ _rotation_increment(omega_new, dt)
    rotation = rotation @ (1.5 * np.eye(3) - 0.5 * (rotation.T @ rotation))

    if (
        np.max(np.abs(position)) > 1e6
        or np.max(np.abs(velocity)) > 1e6
        or np.max(np.abs(omega_new)) > 1e6
    ):
        raise SimulationDiverged(tick=-1, time=math.nan)
    return RigidBodyState(
        position=position, velocity=velocity, rotation=rotation, angular_velocity=omega_new
    )


def _rotation_increment(omega: np.ndarray, dt: float) -> np.ndarray:
    wx, wy, wz = omega
    theta = math.sqrt(wx * wx + wy * wy + wz * wz) * dt
    if theta < 1e-12:
        return np.eye(3)
    ax, ay, az = omega * dt / theta
    k = np.array([[0.0, -az, ay], [az, 0.0, -ax], [-ay, ax, 0.0]])
    return np.eye(3) + math.sin(theta) * k + (1.0 - math.cos(theta)) * (k @ k)


@dataclass(frozen=True)
class GaitTrajectory:
    """Precomputed joint trajectory with footstep markers."""

    times: np.ndarray
    angles: np.ndarray  # (n, n_joints)
    footstep: np.ndarray  # (n,) bool

    def __post_init__(self):
        times = np.asarray(self.times, dtype=float).reshape(-1)
        angles = np.asarray(self.angles, dtype=float)
        footstep = np.asarray(self.footstep, dtype=bool).reshape(-1)
        if times.size == 0:
            raise ValueError("gait trajectory is empty")
        if not np.all(np.diff(times) > 0):
            raise ValueError("gait timestamps must be strictly increasing")
        if angles.shape[0] != times.size or footstep.size != times.size:
            raise ValueError("gait columns must share the row count")
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "angles", angles)
        object.__setattr__(self, "footstep", footstep)

    @classmethod
    def from_csv(cls, path) -> "GaitTrajectory":
        """Load ``t, q_0..q_n, footstep`` rows; header names are free-form."""
        rows = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
        if rows.shape[1] < 3:
            raise ValueError(f"gait file {path} needs time, joints, and footstep columns")
        return cls(times=rows[:, 0], angles=rows[:, 1:-1], footstep=rows[:, -1] > 0.5)

    def sample(self, t: float) -> np.ndarray:
        """Joint angles at time ``t`` (zero-order hold before/after the table)."""
        idx = int(np.searchsorted(self.times, t, side="right")) - 1
        idx = min(max(idx, 0), self.times.size - 1)
        return self.angles[idx]

    def events_between(self, t_prev: float, t: float) -> list[int]:
        """Indices of footstep markers with timestamp in ``(t_prev, t]``."""
        mask = (self.times > t_prev) & (self.times <= t) & self.footstep
        return list(np.flatnonzero(mask))


@dataclass(frozen=True)
class Phase:
    """A locomotion-mode interval of a scenario."""

    start: float
    mode: LocomotionMode
    pose: str | None = None
    gait: GaitTrajectory | None = None
    f_thresh: float | None = None


@dataclass(frozen=True)
class Waypoint:
    t: float
    position: np.ndarray
    yaw: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "position", np.asarray(self.position, dtype=float).reshape(3))


@dataclass(frozen=True)
class Scenario:
    """Mode schedule, waypoints, and initial state of one simulation run."""

    name: str
    duration: float
    phases: tuple[Phase, ...]
    waypoints: tuple[Waypoint, ...] = ()
    control_dt: float = 0.01
    seed: int | None = None
    initial_position: np.ndarray = field(default_factory=lambda: np.zeros(3))
    initial_euler: np.ndarray = field(default_factory=lambda: np.zeros(3))
    initial_velocity: np.ndarray = field(default_factory=lambda: np.zeros(3))
    initial_omega: np.ndarray = field(default_factory=lambda: np.zeros(3))
    start_on_ground: bool = False

    def __post_init__(self):
        if self.duration <= 0:
            raise ValueError("scenario duration must be positive")
        if self.control_dt <= 0:
            raise ValueError("control_dt must be positive")
        if not self.phases:
            raise ValueError("scenario needs at least one phase")
        starts = [phase.start for phase in self.phases]
        if starts[0] > 0:
            raise ValueError("first phase must start at t=0")
        if any(b <= a for a, b in zip(starts, starts[1:])):
            raise ValueError("phase start times must be strictly increasing")
        for name in ("initial_position", "initial_euler", "initial_velocity", "initial_omega"):
            object.__setattr__(self, name, np.asarray(getattr(self, name), dtype=float).reshape(3))


TRACE_VERSION = "trivec.trace.v1"

TRACE_COLUMNS = (
    "t",
    "r_x",
    "r_y",
    "r_z",
    "roll",
    "pitch",
    "yaw",
    "omega_x",
    "omega_y",
    "omega_z",
    "lambda_1",
    "alpha_1",
    "lambda_2",
    "alpha_2",
    "lambda_3",
    "alpha_3",
    "a_z_cmd",
    "f_contact",
    "saturated",
)


@dataclass(frozen=True)
class Trace:
    """Per-tick log of a scenario run; numeric block plus the mode label."""

    data: np.ndarray  # (n_ticks, len(TRACE_COLUMNS))
    modes: tuple[str, ...]

    def __post_init__(self):
        data = np.asarray(self.data, dtype=float)
        if data.ndim != 2 or data.shape[1] != len(TRACE_COLUMNS):
            raise ValueError(f"trace data must have {len(TRACE_COLUMNS)} columns")
        if data.shape[0] != len(self.modes):
            raise ValueError("mode labels must match the row count")
        object.__setattr__(self, "data", data)
        object.__setattr__(self, "modes", tuple(self.modes))

    def column(self, name: str) -> np.ndarray:
        return self.data[:, TRACE_COLUMNS.index(name)]

    def rows_in_mode(self, mode: LocomotionMode) -> np.ndarray:
        return np.array([m == mode.value for m in self.modes], dtype=bool)

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as handle:
            handle.write(f"# {TRACE_VERSION}\n")
            writer = csv.writer(handle)
            writer.writerow(TRACE_COLUMNS + ("mode",))
            for row, mode in zip(self.data, self.modes):
                writer.writerow([repr(float(v)) for v in row] + [mode])

    def summary(self, ctrl_targets: np.ndarray | None = None) -> dict:
        """Headline numbers: final errors, command extremes, saturation count."""
        final_pos = self.data[-1, 1:4]
        result = {
            "ticks": int(self.data.shape[0]),
            "final_position": final_pos.tolist(),
            "max_abs_a_z": float(np.max(np.abs(self.column("a_z_cmd")))),
            "saturated_ticks": int(np.sum(self.column("saturated") > 0)),
            "final_f_contact": float(self.column("f_contact")[-1]),
        }
        if ctrl_targets is not None:
            result["final_position_error"] = float(
                np.max(np.abs(final_pos - np.asarray(ctrl_targets, dtype=float)))
            )
        return result


def _measured_state(state: RigidBodyState, noise: SensorNoise, rng) -> RigidBodyState:
    if not noise.any():
        return state
    euler = state.euler + rng.normal(0.0, 1.0, 3) * noise.euler
    return RigidBodyState(
        position=state.position + rng.normal(0.0, 1.0, 3) * noise.position,
        velocity=state.velocity + rng.normal(0.0, 1.0, 3) * noise.velocity,
        rotation=euler_to_rotation(euler),
        angular_velocity=state.angular_velocity + rng.normal(0.0, 1.0, 3) * noise.omega,
    )


def run_scenario(
    scenario: Scenario,
    geom: TrirotorGeometry,
    model: HumanoidModel,
    gains: GainSet,
    cfg: SimConfig,
    mode_params: ModeParams | None = None,
    poses: dict[str, JointVector] | None = None,
) -> Trace:
    """Closed-loop run: controller at the control period, physics substeps between.

    Deterministic for fixed inputs and seed. Raises
    :class:`SimulationDiverged` (carrying the failing tick) when the rigid
    body leaves the sanity bounds.
    """
    mode_params = mode_params or ModeParams(control_dt=scenario.control_dt)
    poses = poses or {}
    n_sub = int(round(scenario.control_dt / cfg.dt))
    if abs(n_sub * cfg.dt - scenario.control_dt) > 1e-12 or n_sub < 1:
        raise ValueError("control_dt must be an integer multiple of the physics dt")

    seed = scenario.seed if scenario.seed is not None else cfg.seed
    rng = np.random.default_rng(seed)
    allocator = WrenchAllocator(geom)
    inertia_inv = np.linalg.inv(geom.inertia)

    phase_idx = 0
    phase = scenario.phases[0]
    pose_q = _phase_pose(model, poses, phase)
    points_body = _phase_contacts(model, phase, pose_q)

    rotation0 = euler_to_rotation(scenario.initial_euler)
    position0 = np.array(scenario.initial_position, dtype=float)
    if scenario.start_on_ground and points_body.shape[0] > 0:
        # Place the lowest contact point exactly at ground level.
        position0[2] = -np.min((points_body @ rotation0.T)[:, 2])
    state = RigidBodyState(
        position=position0,
        velocity=scenario.initial_velocity,
        rotation=rotation0,
        angular_velocity=scenario.initial_omega,
    )

    ctrl = ControllerState.for_mode(phase.mode, mode_params)
    ctrl.dt = scenario.control_dt
    if phase.f_thresh is not None:
        ctrl.f_thresh = phase.f_thresh
    ctrl.position_target = state.position.copy()
    # Level flight is the default attitude target; legged footstep updates and
    # waypoint yaw commands override from here.
    ctrl.attitude_target = np.array([0.0, 0.0, state.euler[2]])
    if phase.mode is LocomotionMode.LEGGED and pose_q is not None:
        leg_mode_update(ctrl, model, pose_q, state)

    n_ticks = int(round(scenario.duration / scenario.control_dt))
    data = np.zeros((n_ticks, len(TRACE_COLUMNS)))
    modes: list[str] = []
    sensor_force = 0.0
    waypoint_idx = 0
    t_prev = -scenario.control_dt

    for tick in range(n_ticks):
        t = tick * scenario.control_dt

        while (
            phase_idx + 1 < len(scenario.phases)
            and scenario.phases[phase_idx + 1].start <= t
        ):
            phase_idx += 1
            phase = scenario.phases[phase_idx]
            pose_q = _phase_pose(model, poses, phase)
            old_points = points_body
            points_body = _phase_contacts(model, phase, pose_q)
            if old_points.shape[0] > 0 and points_body.shape[0] > 0:
                # Quasi-static pose change on the ground: the body height
                # follows the joints so the contact height is preserved.
                old_min = float(np.min((old_points @ state.rotation.T)[:, 2]))
                new_min = float(np.min((points_body @ state.rotation.T)[:, 2]))
                state = RigidBodyState(
                    position=state.position + np.array([0.0, 0.0, old_min - new_min]),
                    velocity=state.velocity,
                    rotation=state.rotation,
                    angular_velocity=state.angular_velocity,
                )
            switch_mode(ctrl, phase.mode, state)
            if phase.f_thresh is not None:
                ctrl.f_thresh = phase.f_thresh
            if phase.mode in (LocomotionMode.AERIAL, LocomotionMode.WHEELED):
                ctrl.attitude_target[0] = 0.0
                ctrl.attitude_target[1] = 0.0
            if phase.mode is LocomotionMode.LEGGED and pose_q is not None:
                leg_mode_update(ctrl, model, pose_q, state)

        while (
            waypoint_idx < len(scenario.waypoints)
            and scenario.waypoints[waypoint_idx].t <= t
        ):
            wp = scenario.waypoints[waypoint_idx]
            ctrl.position_target = wp.position.copy()
            if wp.yaw is not None:
                ctrl.attitude_target[2] = wp.yaw
            waypoint_idx += 1

        footstep = False
        q_sample = pose_q
        if phase.gait is not None:
            events = phase.gait.events_between(t_prev, t)
            footstep = bool(events)
            sample_angles = (
                phase.gait.angles[events[-1]] if events else phase.gait.sample(t)
            )
            q_sample = model.joint_vector(sample_angles)

        measured = _measured_state(state, cfg.sensor_noise, rng)
        measured_force = sensor_force
        if cfg.sensor_noise.force > 0.0:
            measured_force += float(rng.normal(0.0, cfg.sensor_noise.force))
        sensors = SensorBundle(
            f_contact=measured_force, q=q_sample, footstep_event=footstep
        )
        commands, diag = control_step(
            measured, ctrl, gains, geom, sensors, model=model, allocator=allocator
        )
        applied = allocator.compose(lambda_from_rotor_commands(commands))

        r, v, rot, omega, sensor_force, diverged = kernels.rigid_substeps(
            state.position,
            state.velocity,
            state.rotation,
            state.angular_velocity,
            n_sub,
            cfg.dt,
            geom.mass,
            geom.inertia,
            inertia_inv,
            applied.force,
            applied.torque,
            points_body,
            cfg.contact_stiffness,
            cfg.contact_damping,
            cfg.rolling_friction_coefficient,
            _FRICTION_MODE[phase.mode],
            GRAVITY,
            FRICTION_VELOCITY_SCALE,
        )
        if diverged:
            raise SimulationDiverged(tick=tick, time=t)
        state = RigidBodyState(position=r, velocity=v, rotation=rot, angular_velocity=omega)

        euler = state.euler
        data[tick, 0] = t
        data[tick, 1:4] = state.position
        data[tick, 4:7] = euler
        data[tick, 7:10] = state.angular_velocity
        for i, cmd in enumerate(commands):
            data[tick, 10 + 2 * i] = cmd.magnitude
            data[tick, 11 + 2 * i] = cmd.vectoring_angle
        data[tick, 16] = diag.a_z_cmd
        data[tick, 17] = sensor_force
        data[tick, 18] = 1.0 if diag.saturation.any() else 0.0
        modes.append(phase.mode.value)
        t_prev = t

    return Trace(data=data, modes=tuple(modes))


def _phase_pose(model: HumanoidModel, poses: dict[str, JointVector], phase: Phase):
    if phase.pose is not None:
        if phase.pose not in poses:
            raise KeyError(f"scenario phase references unknown pose {phase.pose!r}")
        return poses[phase.pose]
    if phase.mode is LocomotionMode.AERIAL:
        return None
    return model.joint_vector(np.zeros(len(model.joint_names)))


def _phase_contacts(model: HumanoidModel, phase: Phase, pose_q) -> np.ndarray:
    if phase.mode is LocomotionMode.AERIAL or pose_q is None:
        return np.zeros((0, 3))
    return contact_points_body(model, pose_q, phase.mode)
