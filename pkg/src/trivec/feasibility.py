"""Feasible pitch-torque analysis and clutch-angle selection.

For a body pitched by ``theta``, sustaining hover requires the wrench
``(-M g sin(theta), 0, M g cos(theta), 0, tau_y, 0)``; the feasible pitch
torques ``tau_y`` are those whose exact allocation keeps every rotor within
its thrust and vectoring limits. The pitch angle maximizing the feasible
torque interval is the most robust mounting orientation for the flight unit.

Two independent routes to the torque interval are provided:

* :func:`feasible_torque_range` scans ``tau_y`` and tests feasibility through
  the exact linear inverse (cheap, refined by bisection at the boundaries);
* :func:`brute_force_torque_range` exhaustively sweeps a grid of raw actuator
  inputs through the forward map and never inverts anything. It serves as the
  independent cross-check for the scan.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .allocation import WrenchAllocator
from .kinematics import (
    HumanoidModel,
    JointVector,
    cog_projection,
    contains,
    support_polygon,
    torso_orientation,
)
from .model import GRAVITY, LocomotionMode, TrirotorGeometry, Wrench

_TAU_Y = 4  # wrench vector index of the pitch torque


class FeasibilityError(RuntimeError):
    """No pitch angle admits a feasible hover at all."""


@dataclass(frozen=True)
class FeasibilityConfig:
    """Discretization of the pitch/torque search.

    ``theta_grid`` is the ordered list of pitch angles scanned by
    :func:`optimize_pitch_angle`; ``tau_grid_resolution`` the torque scan
    step; the two grid-point counts size the per-axis actuator sweep of the
    brute-force oracle.
    """

    theta_grid: np.ndarray
    tau_grid_resolution: float = 0.01
    lambda_grid_points: int = 25
    alpha_grid_points: int = 25

    def __post_init__(self):
        grid = np.asarray(self.theta_grid, dtype=float).reshape(-1)
        if grid.size == 0:
            raise ValueError("theta_grid must be non-empty")
        if grid.size > 1 and not np.all(np.diff(grid) > 0):
            raise ValueError("theta_grid must be strictly increasing")
        grid.setflags(write=False)
        object.__setattr__(self, "theta_grid", grid)
        if self.tau_grid_resolution <= 0:
            raise ValueError("tau_grid_resolution must be positive")
        if self.lambda_grid_points < 2 or self.alpha_grid_points < 2:
            raise ValueError("actuator grids need at least 2 points per axis")

    @classmethod
    def default(cls, theta_span: float = math.pi / 3, theta_step: float = 0.01) -> "FeasibilityConfig":
        n = int(round(theta_span / theta_step))
        grid = np.arange(-n, n + 1) * theta_step
        return cls(theta_grid=grid)


@dataclass(frozen=True)
class TorqueRange:
    """Feasible pitch-torque interval at one body pitch angle."""

    theta: float
    tau_min: float
    tau_max: float
    feasible: bool

    def __post_init__(self):
        object.__setattr__(self, "theta", float(self.theta))
        object.__setattr__(self, "tau_min", float(self.tau_min))
        object.__setattr__(self, "tau_max", float(self.tau_max))
        if self.feasible and not self.tau_min <= self.tau_max:
            raise ValueError("feasible range requires tau_min <= tau_max")

    @property
    def span(self) -> float:
        return self.tau_max - self.tau_min if self.feasible else math.nan

    @classmethod
    def infeasible(cls, theta: float) -> "TorqueRange":
        return cls(theta=theta, tau_min=math.nan, tau_max=math.nan, feasible=False)


def hover_wrench_at_pitch(mass: float, theta: float, tau_y: float) -> Wrench:
    """Wrench sustaining hover with the body pitched by ``theta``.

    Gravity compensation splits between the body x and z axes; the only free
    torque is the pitch component ``tau_y``.
    """
    if mass <= 0:
        raise ValueError(f"mass must be positive, got {mass}")
    weight = mass * GRAVITY
    return Wrench(
        force=np.array([-weight * math.sin(theta), 0.0, weight * math.cos(theta)]),
        torque=np.array([0.0, tau_y, 0.0]),
    )


def _commands_within_limits(geom: TrirotorGeometry, components: np.ndarray) -> np.ndarray:
    """Vectorized per-rotor limit check on thrust component arrays (..., 6)."""
    perp = components[..., 0::2]
    par = components[..., 1::2]
    magnitude = np.hypot(perp, par)
    angle = np.arctan2(par, perp)
    angle = np.where(magnitude == 0.0, 0.0, angle)
    ok = (
        (magnitude >= geom.lambda_min)
        & (magnitude <= geom.lambda_max)
        & (angle >= geom.alpha_min)
        & (angle <= geom.alpha_max)
    )
    return np.all(ok, axis=-1)


def is_wrench_feasible(
    geom: TrirotorGeometry, wrench: Wrench, allocator: WrenchAllocator | None = None
) -> bool:
    """True iff the exact allocation of ``wrench`` respects all rotor limits."""
    allocator = allocator or WrenchAllocator(geom)
    lam = allocator.allocate(wrench)
    return bool(_commands_within_limits(geom, lam.components))


def _tau_span_bound(geom: TrirotorGeometry) -> float:
    """Upper bound on any achievable |tau_y| under the thrust limits."""
    row = np.array([-geom.d_f, geom.h, -geom.d_f, geom.h, geom.d_r, 0.0])
    blocks = row.reshape(3, 2)
    lam_bound = max(abs(geom.lambda_min), abs(geom.lambda_max))
    return float(lam_bound * np.sum(np.linalg.norm(blocks, axis=1)))


def feasible_torque_range(
    geom: TrirotorGeometry,
    mass: float,
    theta: float,
    cfg: FeasibilityConfig,
    allocator: WrenchAllocator | None = None,
) -> TorqueRange:
    """Feasible ``tau_y`` interval at pitch ``theta`` via the exact inverse.

    The allocation is affine in ``tau_y``, so a symmetric grid scan finds the
    interval and bisection refines both boundaries well below the grid
    resolution. Returns an infeasible range when no scanned torque (hover
    included) is achievable.
    """
    allocator = allocator or WrenchAllocator(geom)
    base = allocator.allocate(hover_wrench_at_pitch(mass, theta, 0.0)).components
    direction = allocator.allocate(
        Wrench(force=np.zeros(3), torque=np.array([0.0, 1.0, 0.0]))
    ).components

    def feasible_at(tau: float) -> bool:
        return bool(_commands_within_limits(geom, base + tau * direction))

    resolution = cfg.tau_grid_resolution
    steps = int(math.ceil(_tau_span_bound(geom) / resolution)) + 1
    taus = np.arange(-steps, steps + 1) * resolution
    mask = _commands_within_limits(geom, base + taus[:, None] * direction[None, :])
    if not mask.any():
        return TorqueRange.infeasible(theta)

    indices = np.flatnonzero(mask)
    lower = _bisect_boundary(feasible_at, taus[indices[0]], taus[indices[0]] - resolution)
    upper = _bisect_boundary(feasible_at, taus[indices[-1]], taus[indices[-1]] + resolution)
    return TorqueRange(theta=theta, tau_min=lower, tau_max=upper, feasible=True)


def _bisect_boundary(feasible_at, inside: float, outside: float, tol: float = 1e-12) -> float:
    """Refine a feasibility boundary; returns the feasible-side endpoint."""
    if feasible_at(outside):
        return outside
    while abs(outside - inside) > tol:
        mid = 0.5 * (inside + outside)
        if feasible_at(mid):
            inside = mid
        else:
            outside = mid
    return inside


def optimize_pitch_angle(
    geom: TrirotorGeometry, mass: float, cfg: FeasibilityConfig
) -> tuple[float, list[TorqueRange]]:
    """Pitch angle maximizing the feasible torque interval, plus the full curve.

    Spans within 1e-6 N m of the maximum are treated as ties (they arise from
    discretization); ties resolve to the smallest ``|theta|``, then to the
    negative angle.
    """
    allocator = WrenchAllocator(geom)
    curve = [
        feasible_torque_range(geom, mass, float(theta), cfg, allocator=allocator)
        for theta in cfg.theta_grid
    ]
    feasible = [entry for entry in curve if entry.feasible]
    if not feasible:
        raise FeasibilityError("hover is infeasible at every scanned pitch angle")
    best_span = max(entry.span for entry in feasible)
    candidates = [entry for entry in feasible if entry.span >= best_span - 1e-6]
    theta_star = min(candidates, key=lambda entry: (abs(entry.theta), -_sign(entry.theta))).theta
    return float(theta_star), curve


def _sign(x: float) -> float:
    return math.copysign(1.0, x) if x != 0.0 else 0.0


@dataclass(frozen=True)
class BruteForceResult:
    """Torque interval recovered by the exhaustive actuator sweep.

    ``tau_resolution`` is the torque uncertainty induced by the actuator
    grid spacing; ``wrench_tolerance`` the per-component acceptance window
    that guarantees the sweep does not miss the true boundary samples.
    """

    torque_range: TorqueRange
    accepted: int
    tau_resolution: float
    wrench_tolerance: np.ndarray


def brute_force_torque_range(
    geom: TrirotorGeometry, mass: float, theta: float, cfg: FeasibilityConfig
) -> BruteForceResult:
    """Torque interval by examining all sampled actuator inputs.

    Every combination of per-rotor ``(thrust, vectoring angle)`` grid samples
    is mapped forward through the allocation matrix; combinations whose
    non-pitch components match the hover wrench within the grid-induced
    tolerance contribute their ``tau_y``. Entirely independent of the
    inverse-based scan.
    """
    allocator = WrenchAllocator(geom)
    matrix = allocator.matrix
    lam_values = np.linspace(geom.lambda_min, geom.lambda_max, cfg.lambda_grid_points)
    alpha_values = np.linspace(geom.alpha_min, geom.alpha_max, cfg.alpha_grid_points)
    lam_mesh, alpha_mesh = np.meshgrid(lam_values, alpha_values, indexing="ij")
    samples = np.column_stack(
        [(lam_mesh * np.cos(alpha_mesh)).ravel(), (lam_mesh * np.sin(alpha_mesh)).ravel()]
    )

    d_lam = (geom.lambda_max - geom.lambda_min) / (cfg.lambda_grid_points - 1)
    d_alpha = (geom.alpha_max - geom.alpha_min) / (cfg.alpha_grid_points - 1)
    lam_bound = max(abs(geom.lambda_min), abs(geom.lambda_max))
    # Any admissible actuator pair lies within this radius of a grid sample.
    cell_radius = 0.5 * math.hypot(d_lam, lam_bound * d_alpha)

    contributions = []
    tolerance = np.zeros(6)
    tau_resolution = 0.0
    for i in range(3):
        block = matrix[:, 2 * i : 2 * i + 2]
        contributions.append(samples @ block.T)
        row_norms = np.linalg.norm(block, axis=1)
        tolerance += cell_radius * row_norms
        tau_resolution += cell_radius * row_norms[_TAU_Y]
    tolerance[_TAU_Y] = math.inf

    target = hover_wrench_at_pitch(mass, theta, 0.0).as_vector()
    accepted, tau_min, tau_max = kernels.actuator_sweep(
        contributions[0], contributions[1], contributions[2], target, tolerance
    )
    if accepted == 0:
        return BruteForceResult(
            torque_range=TorqueRange.infeasible(theta),
            accepted=0,
            tau_resolution=tau_resolution,
            wrench_tolerance=tolerance,
        )
    return BruteForceResult(
        torque_range=TorqueRange(theta=theta, tau_min=tau_min, tau_max=tau_max, feasible=True),
        accepted=accepted,
        tau_resolution=tau_resolution,
        wrench_tolerance=tolerance,
    )


def desired_clutch_angle(
    model: HumanoidModel,
    q: JointVector,
    mode: LocomotionMode,
    theta_flight_unit: float,
    tolerance: float = 0.005,
) -> float | None:
    """Relative pitch between torso and flight unit for a statically valid pose.

    Returns ``torso pitch - theta_flight_unit`` when the CoG ground
    projection lies in the mode's support polygon, ``None`` otherwise (the
    pose is statically invalid, not an error).
    """
    polygon = support_polygon(model, q, mode)
    cog = cog_projection(model, q)
    if not contains(polygon, cog, tolerance=tolerance):
        return None
    pitch = float(torso_orientation(model, q)[1])
    return pitch - theta_flight_unit
