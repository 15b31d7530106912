"""Core domain types for the thrust-vectoring trirotor flight unit.

Defines the geometry of the unit, the wrench / thrust-vector value types,
the rigid-body state, and the 6x6 allocation matrix mapping per-rotor
perpendicular/parallel thrust components to the force and torque acting at
the center of gravity.

Frame conventions
-----------------
World frame: z-up. Body (CoG) frame: x-forward, y-left, z-up. The Euler
view of a rotation is Z-Y-X (yaw-pitch-roll), reported as
``(roll, pitch, yaw)``.

All types here are immutable value objects; operations are pure functions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

GRAVITY = 9.81  # m/s^2

_THREE_QUARTER_PI = 3.0 * math.pi / 4.0


class LocomotionMode(Enum):
    """The three locomotion modes of the flying humanoid."""

    AERIAL = "aerial"
    LEGGED = "legged"
    WHEELED = "wheeled"


def _frozen_array(value, shape, name: str) -> np.ndarray:
    arr = np.array(value, dtype=float).reshape(shape)
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} must be finite, got {arr!r}")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class TrirotorGeometry:
    """Link lengths, mass properties, and actuator limits of the trirotor.

    Parameters
    ----------
    l : float
        Half-span between the two front rotors (m).
    h : float
        Vertical offset of the vectored thrust lines (m).
    d_f : float
        Longitudinal offset of the front rotor pair from the CoG (m).
    d_r : float
        Longitudinal offset of the rear rotor from the CoG (m).
    mass : float
        Total mass carried by the unit (kg).
    inertia : array-like, shape (3, 3)
        Symmetric positive-definite inertia matrix (kg m^2).
    lambda_min, lambda_max : float
        Per-rotor thrust magnitude limits (N).
    alpha_min, alpha_max : float
        Per-rotor vectoring angle limits (rad).
    """

    l: float
    h: float
    d_f: float
    d_r: float
    mass: float
    inertia: np.ndarray
    lambda_min: float = 0.0
    lambda_max: float = 18.0
    alpha_min: float = -_THREE_QUARTER_PI
    alpha_max: float = _THREE_QUARTER_PI

    def __post_init__(self):
        if self.l <= 0:
            raise ValueError(f"l must be positive, got {self.l}")
        if self.h < 0:
            raise ValueError(f"h must be non-negative, got {self.h}")
        if self.d_f <= 0:
            raise ValueError(f"d_f must be positive, got {self.d_f}")
        if self.d_r <= 0:
            raise ValueError(f"d_r must be positive, got {self.d_r}")
        if self.mass <= 0:
            raise ValueError(f"mass must be positive, got {self.mass}")
        inertia = _frozen_array(self.inertia, (3, 3), "inertia")
        if not np.allclose(inertia, inertia.T, atol=1e-9):
            raise ValueError("inertia must be symmetric")
        if np.any(np.linalg.eigvalsh(inertia) <= 0):
            raise ValueError("inertia must be positive definite")
        object.__setattr__(self, "inertia", inertia)
        if not self.lambda_min < self.lambda_max:
            raise ValueError(
                f"thrust limits require lambda_min < lambda_max, "
                f"got [{self.lambda_min}, {self.lambda_max}]"
            )
        if not self.alpha_min < self.alpha_max:
            raise ValueError(
                f"vectoring limits require alpha_min < alpha_max, "
                f"got [{self.alpha_min}, {self.alpha_max}]"
            )


@dataclass(frozen=True)
class Wrench:
    """Force and torque in the CoG frame."""

    force: np.ndarray
    torque: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "force", _frozen_array(self.force, (3,), "force"))
        object.__setattr__(self, "torque", _frozen_array(self.torque, (3,), "torque"))

    @classmethod
    def from_vector(cls, vec) -> "Wrench":
        vec = np.asarray(vec, dtype=float).reshape(6)
        return cls(force=vec[:3], torque=vec[3:])

    @classmethod
    def zero(cls) -> "Wrench":
        return cls(force=np.zeros(3), torque=np.zeros(3))

    def as_vector(self) -> np.ndarray:
        return np.concatenate([self.force, self.torque])


@dataclass(frozen=True)
class ThrustVector:
    """The 6-vector of per-rotor thrust components.

    Ordering is ``(perp_1, par_1, perp_2, par_2, perp_3, par_3)`` where
    ``perp`` is the component along the rotor's untilted axis and ``par``
    the in-plane component produced by vectoring.
    """

    components: np.ndarray

    def __post_init__(self):
        object.__setattr__(
            self, "components", _frozen_array(self.components, (6,), "components")
        )

    @classmethod
    def zero(cls) -> "ThrustVector":
        return cls(components=np.zeros(6))

    def rotor(self, i: int) -> tuple[float, float]:
        """Return ``(perpendicular, parallel)`` components of rotor ``i`` (0-based)."""
        if not 0 <= i < 3:
            raise IndexError(f"rotor index must be 0..2, got {i}")
        return float(self.components[2 * i]), float(self.components[2 * i + 1])


@dataclass(frozen=True)
class RotorCommand:
    """Thrust magnitude and vectoring angle of a single rotor."""

    magnitude: float
    vectoring_angle: float

    def __post_init__(self):
        if not math.isfinite(self.magnitude) or not math.isfinite(self.vectoring_angle):
            raise ValueError("rotor command must be finite")
        if self.magnitude < 0:
            raise ValueError(f"magnitude must be non-negative, got {self.magnitude}")


def euler_to_rotation(euler) -> np.ndarray:
    """Rotation matrix from a ``(roll, pitch, yaw)`` Euler view (Z-Y-X composition)."""
    roll, pitch, yaw = np.asarray(euler, dtype=float).reshape(3)
    cr, sr = math.cos(roll), math.sin(roll)
    cp, sp = math.cos(pitch), math.sin(pitch)
    cy, sy = math.cos(yaw), math.sin(yaw)
    return np.array(
        [
            [cy * cp, cy * sp * sr - sy * cr, cy * sp * cr + sy * sr],
            [sy * cp, sy * sp * sr + cy * cr, sy * sp * cr - cy * sr],
            [-sp, cp * sr, cp * cr],
        ]
    )


def rotation_to_euler(rotation: np.ndarray) -> np.ndarray:
    """Euler view ``(roll, pitch, yaw)`` of a rotation matrix (Z-Y-X composition).

    Pitch is reported in ``[-pi/2, pi/2]``; at the gimbal singularity the
    roll/yaw split is resolved by assigning the full rotation to yaw.
    """
    rot = np.asarray(rotation, dtype=float).reshape(3, 3)
    sp = -rot[2, 0]
    sp = min(1.0, max(-1.0, sp))
    pitch = math.asin(sp)
    if abs(sp) > 1.0 - 1e-12:
        roll = 0.0
        yaw = math.atan2(-rot[0, 1], rot[1, 1])
    else:
        roll = math.atan2(rot[2, 1], rot[2, 2])
        yaw = math.atan2(rot[1, 0], rot[0, 0])
    return np.array([roll, pitch, yaw])


def orthonormalize(rotation: np.ndarray) -> np.ndarray:
    """Project a near-rotation matrix back onto SO(3) (polar decomposition)."""
    u, _, vt = np.linalg.svd(np.asarray(rotation, dtype=float).reshape(3, 3))
    rot = u @ vt
    if np.linalg.det(rot) < 0:
        u[:, -1] = -u[:, -1]
        rot = u @ vt
    return rot


@dataclass(frozen=True)
class RigidBodyState:
    """Position, velocity, rotation, and body angular velocity of the unit.

    ``rotation`` maps CoG-frame vectors to the world frame; angular velocity
    is expressed in the CoG frame.
    """

    position: np.ndarray
    velocity: np.ndarray
    rotation: np.ndarray
    angular_velocity: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "position", _frozen_array(self.position, (3,), "position"))
        object.__setattr__(self, "velocity", _frozen_array(self.velocity, (3,), "velocity"))
        rot = _frozen_array(self.rotation, (3, 3), "rotation")
        if not np.allclose(rot.T @ rot, np.eye(3), atol=1e-9):
            raise ValueError("rotation must be orthonormal within 1e-9")
        if abs(np.linalg.det(rot) - 1.0) > 1e-9:
            raise ValueError("rotation must have determinant 1 within 1e-9")
        object.__setattr__(self, "rotation", rot)
        object.__setattr__(
            self,
            "angular_velocity",
            _frozen_array(self.angular_velocity, (3,), "angular_velocity"),
        )

    @classmethod
    def at_rest(cls, position, euler=(0.0, 0.0, 0.0)) -> "RigidBodyState":
        return cls(
            position=np.asarray(position, dtype=float),
            velocity=np.zeros(3),
            rotation=euler_to_rotation(euler),
            angular_velocity=np.zeros(3),
        )

    @property
    def euler(self) -> np.ndarray:
        """Derived ``(roll, pitch, yaw)`` view of the rotation."""
        return rotation_to_euler(self.rotation)


def build_allocation_matrix(geom: TrirotorGeometry) -> np.ndarray:
    """The 6x6 allocation matrix mapping thrust components to the CoG wrench.

    Row order is ``(f_x, f_y, f_z, tau_x, tau_y, tau_z)``; column order
    matches :class:`ThrustVector`. Entries are a pure function of the link
    lengths ``l``, ``h``, ``d_f``, ``d_r``.
    """
    l, h, d_f, d_r = geom.l, geom.h, geom.d_f, geom.d_r
    return np.array(
        [
            [0.0, 1.0, 0.0, 1.0, 0.0, 0.0],
            [0.0, 0.0, 0.0, 0.0, 0.0, 1.0],
            [1.0, 0.0, 1.0, 0.0, 1.0, 0.0],
            [l, 0.0, -l, 0.0, 0.0, -h],
            [-d_f, h, -d_f, h, d_r, 0.0],
            [0.0, -l, 0.0, l, 0.0, -d_r],
        ]
    )


def allocation_determinant(geom: TrirotorGeometry) -> float:
    """Closed-form determinant of the allocation matrix: ``-4 l^2 (d_f + d_r)``.

    Nonzero for every valid geometry, so the allocation is always invertible.
    """
    return -4.0 * geom.l**2 * (geom.d_f + geom.d_r)
