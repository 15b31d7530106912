"""Wrench allocation: inversion of the allocation map and rotor decomposition.

The allocation matrix is constant for a fixed geometry, so :class:`WrenchAllocator`
caches its inverse once and each subsequent wrench solve is a single
matrix-vector product. Clamping against actuator limits is a separate,
explicit step so callers can detect infeasibility instead of silently
saturating.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .model import (
    RotorCommand,
    ThrustVector,
    TrirotorGeometry,
    Wrench,
    build_allocation_matrix,
)


class AllocationSingularError(RuntimeError):
    """The allocation solve failed (corrupted geometry input)."""


class WrenchAllocator:
    """Cached inverse of the allocation matrix for one geometry.

    Immutable after construction; safe to share between threads.
    """

    def __init__(self, geom: TrirotorGeometry):
        self.geom = geom
        self.matrix = build_allocation_matrix(geom)
        self.matrix.setflags(write=False)
        try:
            inverse = np.linalg.inv(self.matrix)
        except np.linalg.LinAlgError as exc:  # unreachable for valid geometry
            raise AllocationSingularError(
                "allocation matrix is singular; geometry is corrupted"
            ) from exc
        inverse.setflags(write=False)
        self._inverse = inverse

    def allocate(self, desired: Wrench) -> ThrustVector:
        """Thrust components reproducing ``desired`` exactly."""
        return ThrustVector(components=self._inverse @ desired.as_vector())

    def compose(self, lam: ThrustVector) -> Wrench:
        """Forward map: the wrench generated by the thrust components ``lam``."""
        return Wrench.from_vector(self.matrix @ lam.components)


def allocate_wrench(geom: TrirotorGeometry, desired: Wrench) -> ThrustVector:
    """Solve the allocation for a single wrench (see :class:`WrenchAllocator`)."""
    return WrenchAllocator(geom).allocate(desired)


def compose_wrench(geom: TrirotorGeometry, lam: ThrustVector) -> Wrench:
    """Forward map of thrust components through the allocation matrix."""
    return WrenchAllocator(geom).compose(lam)


def rotor_commands_from_lambda(lam: ThrustVector) -> tuple[RotorCommand, RotorCommand, RotorCommand]:
    """Per-rotor thrust magnitude and vectoring angle.

    The angle uses the two-argument arctangent so the full vectoring range
    (beyond +-pi/2) is representable; a zero component pair maps to
    ``(0, 0)`` by convention.
    """
    commands = []
    for i in range(3):
        perp, par = lam.rotor(i)
        magnitude = math.hypot(perp, par)
        angle = 0.0 if magnitude == 0.0 else math.atan2(par, perp)
        commands.append(RotorCommand(magnitude=magnitude, vectoring_angle=angle))
    return tuple(commands)


def lambda_from_rotor_commands(cmds) -> ThrustVector:
    """Inverse of :func:`rotor_commands_from_lambda`."""
    components = np.empty(6)
    for i, cmd in enumerate(cmds):
        components[2 * i] = cmd.magnitude * math.cos(cmd.vectoring_angle)
        components[2 * i + 1] = cmd.magnitude * math.sin(cmd.vectoring_angle)
    return ThrustVector(components=components)


@dataclass(frozen=True)
class SaturationFlags:
    """Which actuator limits were hit during clamping (per rotor)."""

    magnitude: np.ndarray  # bool (3,)
    angle: np.ndarray  # bool (3,)

    def __post_init__(self):
        object.__setattr__(self, "magnitude", np.asarray(self.magnitude, dtype=bool).reshape(3))
        object.__setattr__(self, "angle", np.asarray(self.angle, dtype=bool).reshape(3))

    def any(self) -> bool:
        return bool(self.magnitude.any() or self.angle.any())

    @classmethod
    def none(cls) -> "SaturationFlags":
        return cls(magnitude=np.zeros(3, dtype=bool), angle=np.zeros(3, dtype=bool))


def clamp_commands(geom: TrirotorGeometry, cmds) -> tuple[tuple[RotorCommand, ...], SaturationFlags]:
    """Clamp rotor commands into the geometry's actuator limits.

    Returns the clamped commands and flags reporting which rotors hit a
    magnitude or angle limit.
    """
    clamped = []
    mag_sat = np.zeros(3, dtype=bool)
    ang_sat = np.zeros(3, dtype=bool)
    for i, cmd in enumerate(cmds):
        magnitude = min(max(cmd.magnitude, geom.lambda_min), geom.lambda_max)
        angle = min(max(cmd.vectoring_angle, geom.alpha_min), geom.alpha_max)
        mag_sat[i] = magnitude != cmd.magnitude
        ang_sat[i] = angle != cmd.vectoring_angle
        clamped.append(RotorCommand(magnitude=magnitude, vectoring_angle=angle))
    return tuple(clamped), SaturationFlags(magnitude=mag_sat, angle=ang_sat)
