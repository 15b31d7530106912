"""Integrated locomotion control: attitude/position PID, mode clamps, and the
wheel-mode contact-force feedback.

The same flight controller serves all three locomotion modes; legged and
wheeled operation only re-shape the vertical acceleration channel. In legged
mode the commanded vertical acceleration is clamped into
``[alpha_stable, g)`` so thrust unloads the leg joints without ever hovering;
wheeled mode replaces the vertical channel with a dedicated PID plus an
accumulator that drives the measured contact force to its target, clamped
into ``[beta_stable, g)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .allocation import (
    SaturationFlags,
    WrenchAllocator,
    clamp_commands,
    rotor_commands_from_lambda,
)
from .kinematics import HumanoidModel, JointVector, torso_orientation
from .model import GRAVITY, LocomotionMode, RigidBodyState, RotorCommand, TrirotorGeometry, Wrench

HOVER_MARGIN = 1e-3  # m/s^2 below g; keeps the no-hover clamp strict


@dataclass(frozen=True)
class GainSet:
    """Diagonal PID gains for attitude and position loops plus the wheel-mode
    vertical channel and its contact-force feedback gain."""

    attitude_p: np.ndarray
    attitude_i: np.ndarray
    attitude_d: np.ndarray
    position_p: np.ndarray
    position_i: np.ndarray
    position_d: np.ndarray
    wheel_z_p: float = 4.0
    wheel_z_i: float = 0.0
    wheel_z_d: float = 2.0
    force_feedback_gain: float = 0.5
    integral_limit: float = 2.0

    def __post_init__(self):
        for name in ("attitude_p", "attitude_i", "attitude_d",
                     "position_p", "position_i", "position_d"):
            gains = np.asarray(getattr(self, name), dtype=float).reshape(3)
            if np.any(gains < 0):
                raise ValueError(f"{name} entries must be non-negative")
            gains.setflags(write=False)
            object.__setattr__(self, name, gains)
        for name in ("wheel_z_p", "wheel_z_i", "wheel_z_d", "force_feedback_gain"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative")
        if self.integral_limit <= 0:
            raise ValueError("integral_limit must be positive")


@dataclass(frozen=True)
class ModeParams:
    """Mode-switching parameters shared by controller construction."""

    alpha_stable: float = 0.4 * GRAVITY
    beta_stable: float = 0.75 * GRAVITY
    f_thresh: float = 8.0
    control_dt: float = 0.01
    leg_z_offset: float = 0.05


@dataclass
class ControllerState:
    """Mutable controller memory: integrals, targets, and mode parameters.

    Single-writer: only :func:`control_step` and :func:`switch_mode` mutate
    an instance. Integrals reset on every mode transition.
    """

    mode: LocomotionMode
    dt: float
    alpha_stable: float = 0.4 * GRAVITY
    beta_stable: float = 0.75 * GRAVITY
    f_thresh: float = 8.0
    leg_z_offset: float = 0.05
    position_target: np.ndarray = field(default_factory=lambda: np.zeros(3))
    attitude_target: np.ndarray = field(default_factory=lambda: np.zeros(3))
    attitude_integral: np.ndarray = field(default_factory=lambda: np.zeros(3))
    position_integral: np.ndarray = field(default_factory=lambda: np.zeros(3))
    wheel_z_integral: float = 0.0
    force_feedback_accumulator: float = 0.0

    def __post_init__(self):
        if self.dt <= 0:
            raise ValueError("control period dt must be positive")
        if not 0 < self.alpha_stable < GRAVITY:
            raise ValueError("alpha_stable must lie in (0, g)")
        if not 0 < self.beta_stable < GRAVITY:
            raise ValueError("beta_stable must lie in (0, g)")
        self.position_target = np.array(self.position_target, dtype=float).reshape(3)
        self.attitude_target = np.array(self.attitude_target, dtype=float).reshape(3)
        self.attitude_integral = np.array(self.attitude_integral, dtype=float).reshape(3)
        self.position_integral = np.array(self.position_integral, dtype=float).reshape(3)

    @classmethod
    def for_mode(cls, mode: LocomotionMode, params: ModeParams) -> "ControllerState":
        return cls(
            mode=mode,
            dt=params.control_dt,
            alpha_stable=params.alpha_stable,
            beta_stable=params.beta_stable,
            f_thresh=params.f_thresh,
            leg_z_offset=params.leg_z_offset,
        )


@dataclass
class SensorBundle:
    """Per-tick sensor inputs consumed by :func:`control_step`."""

    f_contact: float = 0.0
    q: JointVector | None = None
    footstep_event: bool = False


@dataclass(frozen=True)
class ControlDiagnostics:
    """Pre-clamp allocation products and the commanded vertical acceleration."""

    lambda_raw: np.ndarray
    commands_raw: tuple[RotorCommand, ...]
    commands: tuple[RotorCommand, ...]
    saturation: SaturationFlags
    a_cmd: np.ndarray
    f_des: np.ndarray
    tau_des: np.ndarray

    @property
    def a_z_cmd(self) -> float:
        return float(self.a_cmd[2])


def _wrap_angles(err: np.ndarray) -> np.ndarray:
    return (err + math.pi) % (2.0 * math.pi) - math.pi


def attitude_control(
    state: RigidBodyState,
    ctrl: ControllerState,
    gains: GainSet,
    inertia: np.ndarray,
) -> np.ndarray:
    """Target torque in the CoG frame: gyroscopic feedforward plus PID on the
    Euler-angle error, derivative acting on the body rate (zero rate target)."""
    omega = state.angular_velocity
    err = _wrap_angles(ctrl.attitude_target - state.euler)
    ctrl.attitude_integral = np.clip(
        ctrl.attitude_integral + err * ctrl.dt, -gains.integral_limit, gains.integral_limit
    )
    return (
        np.cross(omega, inertia @ omega)
        + gains.attitude_p * err
        + gains.attitude_i * ctrl.attitude_integral
        + gains.attitude_d * (-omega)
    )


def leg_clamp(a_z_cmd: float, alpha_stable: float) -> float:
    """Clamp the vertical acceleration command into ``[alpha_stable, g)``.

    Thrust stays large enough to unload the legs but strictly below hover.
    """
    if not 0 < alpha_stable < GRAVITY:
        raise ValueError("alpha_stable must lie in (0, g)")
    return min(max(a_z_cmd, alpha_stable), GRAVITY - HOVER_MARGIN)


def wheel_clamp(a_z_cmd: float, beta_stable: float) -> float:
    """Clamp the vertical acceleration command into ``[beta_stable, g)``."""
    if not 0 < beta_stable < GRAVITY:
        raise ValueError("beta_stable must lie in (0, g)")
    return min(max(a_z_cmd, beta_stable), GRAVITY - HOVER_MARGIN)


def position_control(
    state: RigidBodyState,
    ctrl: ControllerState,
    gains: GainSet,
    mass: float,
    a_z_override: float | None = None,
) -> tuple[np.ndarray, np.ndarray]:
    """Target translational force in the CoG frame.

    Builds the world-frame commanded acceleration (gravity compensation plus
    PID), applies the active mode's vertical clamp (or the wheel-mode
    override), then maps through ``M R^-1``. Returns ``(f_des, a_cmd)``.
    """
    err = ctrl.position_target - state.position
    vel_err = -state.velocity
    integral = ctrl.position_integral + err * ctrl.dt
    if a_z_override is not None:
        integral[2] = ctrl.position_integral[2]  # channel replaced; hold its integral
    ctrl.position_integral = np.clip(integral, -gains.integral_limit, gains.integral_limit)

    a_cmd = (
        np.array([0.0, 0.0, GRAVITY])
        + gains.position_p * err
        + gains.position_i * ctrl.position_integral
        + gains.position_d * vel_err
    )
    if a_z_override is not None:
        a_cmd[2] = a_z_override
    elif ctrl.mode is LocomotionMode.LEGGED:
        a_cmd[2] = leg_clamp(a_cmd[2], ctrl.alpha_stable)
    elif ctrl.mode is LocomotionMode.WHEELED:
        a_cmd[2] = wheel_clamp(a_cmd[2], ctrl.beta_stable)
    f_des = mass * (state.rotation.T @ a_cmd)
    return f_des, a_cmd


def leg_mode_update(
    ctrl: ControllerState,
    model: HumanoidModel,
    q: JointVector,
    state: RigidBodyState,
) -> None:
    """Footstep-event target refresh for legged locomotion.

    Roll/yaw attitude targets follow the torso pose from forward kinematics;
    the x-y position target snaps to the current position and the z target is
    set a fixed offset above the flight unit so a fall steers thrust upward.
    """
    roll, _, yaw = torso_orientation(model, q)
    ctrl.attitude_target[0] = roll
    ctrl.attitude_target[2] = yaw
    ctrl.position_target[0] = state.position[0]
    ctrl.position_target[1] = state.position[1]
    ctrl.position_target[2] = state.position[2] + ctrl.leg_z_offset


def wheel_mode_update(
    ctrl: ControllerState,
    gains: GainSet,
    z_err: float,
    z_rate_err: float,
    f_contact: float,
    mass: float,
) -> float:
    """Wheel-mode vertical acceleration command with contact-force feedback.

    The accumulator is applied before being advanced by
    ``k_f (f_contact - f_thresh) / M``, so a steady contact force at the
    target is a fixed point. The result is clamped into ``[beta_stable, g)``.
    """
    ctrl.wheel_z_integral = min(
        max(ctrl.wheel_z_integral + z_err * ctrl.dt, -gains.integral_limit),
        gains.integral_limit,
    )
    a_z = (
        gains.wheel_z_p * z_err
        + gains.wheel_z_i * ctrl.wheel_z_integral
        + gains.wheel_z_d * z_rate_err
        + ctrl.force_feedback_accumulator
    )
    accumulator = ctrl.force_feedback_accumulator + gains.force_feedback_gain * (
        f_contact - ctrl.f_thresh
    ) / mass
    ctrl.force_feedback_accumulator = min(max(accumulator, -GRAVITY), GRAVITY)
    return wheel_clamp(a_z, ctrl.beta_stable)


def control_step(
    state: RigidBodyState,
    ctrl: ControllerState,
    gains: GainSet,
    geom: TrirotorGeometry,
    sensors: SensorBundle,
    model: HumanoidModel | None = None,
    allocator: WrenchAllocator | None = None,
) -> tuple[tuple[RotorCommand, ...], ControlDiagnostics]:
    """One tick of the integrated control pipeline.

    Mode-specific target update, position and attitude control, wrench
    allocation, rotor decomposition, and limit clamping. Diagnostics expose
    the pre-clamp products and the commanded vertical acceleration.
    """
    allocator = allocator or WrenchAllocator(geom)
    mass = geom.mass

    a_z_override = None
    if ctrl.mode is LocomotionMode.LEGGED and sensors.footstep_event:
        if model is None or sensors.q is None:
            raise ValueError("legged footstep update needs the humanoid model and gait sample")
        leg_mode_update(ctrl, model, sensors.q, state)
    elif ctrl.mode is LocomotionMode.WHEELED:
        z_err = float(ctrl.position_target[2] - state.position[2])
        z_rate_err = float(-state.velocity[2])
        a_z_override = wheel_mode_update(
            ctrl, gains, z_err, z_rate_err, sensors.f_contact, mass
        )

    f_des, a_cmd = position_control(state, ctrl, gains, mass, a_z_override=a_z_override)
    tau_des = attitude_control(state, ctrl, gains, geom.inertia)

    lam = allocator.allocate(Wrench(force=f_des, torque=tau_des))
    commands_raw = rotor_commands_from_lambda(lam)
    commands, saturation = clamp_commands(geom, commands_raw)
    diagnostics = ControlDiagnostics(
        lambda_raw=lam.components,
        commands_raw=commands_raw,
        commands=commands,
        saturation=saturation,
        a_cmd=a_cmd,
        f_des=f_des,
        tau_des=tau_des,
    )
    return commands, diagnostics


def switch_mode(
    ctrl: ControllerState, new_mode: LocomotionMode, state: RigidBodyState
) -> ControllerState:
    """Transition the controller to ``new_mode`` with bumpless transfer.

    Integrals and the force-feedback accumulator reset; the position target
    snaps to the current position so no step command is issued.
    """
    ctrl.mode = new_mode
    ctrl.attitude_integral = np.zeros(3)
    ctrl.position_integral = np.zeros(3)
    ctrl.wheel_z_integral = 0.0
    ctrl.force_feedback_accumulator = 0.0
    ctrl.position_target = state.position.copy()
    return ctrl
