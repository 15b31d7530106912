"""Reduced humanoid model: forward kinematics, CoG projection, support polygons.

The humanoid is a rigid-link tree rooted at the support foot, whose frame is
assumed ground-parallel at ground level. Only the quantities needed for
clutch-angle selection and locomotion-target updates are modeled: the torso
orientation, the mass-weighted CoG, and the mode-dependent support polygon.

Link convention: each link's frame originates at its joint; ``offset`` is the
translation from the parent frame origin to that joint, expressed in the
parent frame. A link with ``axis=None`` is rigidly fixed to its parent.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .model import LocomotionMode, rotation_to_euler

DEFAULT_CONTAINMENT_TOLERANCE = 0.005  # m, wheel-line membership


def _axis_rotation(axis: np.ndarray, angle: float) -> np.ndarray:
    """Rodrigues rotation about a unit axis."""
    ax, ay, az = axis
    c, s = math.cos(angle), math.sin(angle)
    k = np.array([[0.0, -az, ay], [az, 0.0, -ax], [-ay, ax, 0.0]])
    return np.eye(3) + s * k + (1.0 - c) * (k @ k)


@dataclass(frozen=True)
class Link:
    """One rigid link of the humanoid tree."""

    name: str
    parent: str | None
    axis: np.ndarray | None  # joint rotation axis (link frame); None = fixed
    offset: np.ndarray  # joint position in the parent frame (m)
    mass: float  # kg
    cog: np.ndarray  # link CoG in the link frame (m)
    limits: tuple[float, float] = (-math.pi, math.pi)

    def __post_init__(self):
        object.__setattr__(self, "offset", np.asarray(self.offset, dtype=float).reshape(3))
        object.__setattr__(self, "cog", np.asarray(self.cog, dtype=float).reshape(3))
        if self.axis is not None:
            axis = np.asarray(self.axis, dtype=float).reshape(3)
            norm = np.linalg.norm(axis)
            if norm < 1e-12:
                raise ValueError(f"link {self.name}: joint axis must be nonzero")
            object.__setattr__(self, "axis", axis / norm)
        if self.mass < 0:
            raise ValueError(f"link {self.name}: mass must be non-negative")
        if not self.limits[0] <= self.limits[1]:
            raise ValueError(f"link {self.name}: joint limits out of order")


@dataclass(frozen=True)
class FootGeometry:
    """Foot-plate rectangle and heel-wheel placement, in the foot frame."""

    plate_length: float  # x extent (m)
    plate_width: float  # y extent (m)
    wheel_center: np.ndarray  # wheel axle center (m)
    wheel_radius: float  # m

    def __post_init__(self):
        object.__setattr__(
            self, "wheel_center", np.asarray(self.wheel_center, dtype=float).reshape(3)
        )
        if self.plate_length <= 0 or self.plate_width <= 0:
            raise ValueError("foot plate dimensions must be positive")
        if self.wheel_radius <= 0:
            raise ValueError("wheel radius must be positive")
        # Flat foot and wheel-only contact are interchangeable only when the
        # wheel bottom sits exactly in the sole plane.
        if abs(self.wheel_center[2] - self.wheel_radius) > 1e-9:
            raise ValueError("wheel center height must equal the wheel radius")


@dataclass(frozen=True)
class JointVector:
    """Angles of the actuated joints, ordered as ``HumanoidModel.joint_names``."""

    angles: np.ndarray

    def __post_init__(self):
        angles = np.asarray(self.angles, dtype=float).reshape(-1)
        if not np.all(np.isfinite(angles)):
            raise ValueError("joint angles must be finite")
        object.__setattr__(self, "angles", angles)


@dataclass(frozen=True)
class SupportPolygon:
    """Ground-plane support region: a rectangle (feet) or a segment (wheels)."""

    kind: str  # "rectangle" | "segment"
    vertices: np.ndarray  # (n, 2)

    def __post_init__(self):
        vertices = np.asarray(self.vertices, dtype=float).reshape(-1, 2)
        object.__setattr__(self, "vertices", vertices)
        if self.kind == "rectangle":
            if vertices.shape[0] != 4:
                raise ValueError("rectangle needs 4 vertices")
            if _polygon_area(vertices) <= 0:
                raise ValueError("rectangle vertices must be counter-clockwise and convex")
        elif self.kind == "segment":
            if vertices.shape[0] != 2:
                raise ValueError("segment needs 2 vertices")
            if np.linalg.norm(vertices[1] - vertices[0]) < 1e-12:
                raise ValueError("segment vertices must be distinct")
        else:
            raise ValueError(f"unknown polygon kind {self.kind!r}")


def _polygon_area(vertices: np.ndarray) -> float:
    x, y = vertices[:, 0], vertices[:, 1]
    return 0.5 * float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))


@dataclass(frozen=True)
class HumanoidModel:
    """Link tree plus foot geometry and the names of the special links."""

    links: tuple[Link, ...]
    foot: FootGeometry
    left_foot: str = "left_foot"
    right_foot: str = "right_foot"
    torso: str = "torso"
    flight_mount: str = "flight_mount"
    clutch_joint: str = "flight_mount"

    def __post_init__(self):
        object.__setattr__(self, "links", tuple(self.links))
        names = [link.name for link in self.links]
        if len(set(names)) != len(names):
            raise ValueError("duplicate link names")
        seen: set[str] = set()
        roots = 0
        for link in self.links:
            if link.parent is None:
                roots += 1
            elif link.parent not in seen:
                raise ValueError(
                    f"link {link.name}: parent {link.parent!r} must be declared earlier"
                )
            seen.add(link.name)
        if roots != 1:
            raise ValueError(f"model must have exactly one root link, found {roots}")
        for special in (self.left_foot, self.right_foot, self.torso, self.flight_mount):
            if special not in seen:
                raise ValueError(f"model has no link named {special!r}")
        if self.total_mass <= 0:
            raise ValueError("total mass must be positive")

    @property
    def total_mass(self) -> float:
        return sum(link.mass for link in self.links)

    @property
    def joint_names(self) -> tuple[str, ...]:
        return tuple(link.name for link in self.links if link.axis is not None)

    def joint_vector(self, mapping_or_values) -> JointVector:
        """Build a joint vector from a name->angle mapping or an ordered sequence.

        Unnamed joints default to zero when a mapping is given.
        """
        names = self.joint_names
        if isinstance(mapping_or_values, dict):
            unknown = set(mapping_or_values) - set(names)
            if unknown:
                raise KeyError(f"unknown joints: {sorted(unknown)}")
            values = [float(mapping_or_values.get(name, 0.0)) for name in names]
        else:
            values = [float(v) for v in mapping_or_values]
            if len(values) != len(names):
                raise ValueError(f"expected {len(names)} joint angles, got {len(values)}")
        return JointVector(angles=np.array(values))

    def check_limits(self, q: JointVector) -> None:
        names = self.joint_names
        if q.angles.shape[0] != len(names):
            raise ValueError(f"expected {len(names)} joint angles, got {q.angles.shape[0]}")
        joints = {link.name: link for link in self.links if link.axis is not None}
        for name, angle in zip(names, q.angles):
            lo, hi = joints[name].limits
            if not lo <= angle <= hi:
                raise ValueError(
                    f"joint {name} angle {angle:.4f} outside limits [{lo:.4f}, {hi:.4f}]"
                )


def link_frames(model: HumanoidModel, q: JointVector) -> dict[str, tuple[np.ndarray, np.ndarray]]:
    """Forward kinematics: ``{link name: (rotation, origin)}`` in the root frame."""
    model.check_limits(q)
    angles = dict(zip(model.joint_names, q.angles))
    frames: dict[str, tuple[np.ndarray, np.ndarray]] = {}
    for link in model.links:
        if link.parent is None:
            rot_parent, origin_parent = np.eye(3), np.zeros(3)
        else:
            rot_parent, origin_parent = frames[link.parent]
        origin = origin_parent + rot_parent @ link.offset
        if link.axis is None:
            rot = rot_parent
        else:
            rot = rot_parent @ _axis_rotation(link.axis, angles[link.name])
        frames[link.name] = (rot, origin)
    return frames


def torso_orientation(model: HumanoidModel, q: JointVector) -> np.ndarray:
    """Torso ``(roll, pitch, yaw)`` with the support foot ground-parallel."""
    rot, _ = link_frames(model, q)[model.torso]
    return rotation_to_euler(rot)


def whole_body_cog(model: HumanoidModel, q: JointVector) -> np.ndarray:
    """Mass-weighted CoG of all links, in the root (support foot) frame."""
    frames = link_frames(model, q)
    total = 0.0
    weighted = np.zeros(3)
    for link in model.links:
        if link.mass == 0.0:
            continue
        rot, origin = frames[link.name]
        weighted += link.mass * (origin + rot @ link.cog)
        total += link.mass
    return weighted / total


def cog_projection(model: HumanoidModel, q: JointVector) -> np.ndarray:
    """Orthographic ground-plane projection of the whole-body CoG."""
    return whole_body_cog(model, q)[:2]


def _plate_corners(foot: FootGeometry) -> np.ndarray:
    hx, hy = foot.plate_length / 2.0, foot.plate_width / 2.0
    return np.array(
        [[hx, hy, 0.0], [hx, -hy, 0.0], [-hx, -hy, 0.0], [-hx, hy, 0.0]]
    )


def support_polygon(model: HumanoidModel, q: JointVector, mode: LocomotionMode) -> SupportPolygon:
    """Mode-dependent support region on the ground plane.

    Legged and aerial modes share the rectangle spanned by the two foot
    plates; wheeled mode is the segment connecting the wheel contact points.
    """
    frames = link_frames(model, q)
    feet = [frames[model.left_foot], frames[model.right_foot]]
    if mode in (LocomotionMode.LEGGED, LocomotionMode.AERIAL):
        corners = []
        for rot, origin in feet:
            for corner in _plate_corners(model.foot):
                corners.append((origin + rot @ corner)[:2])
        corners = np.array(corners)
        xmin, ymin = corners.min(axis=0)
        xmax, ymax = corners.max(axis=0)
        vertices = np.array([[xmin, ymin], [xmax, ymin], [xmax, ymax], [xmin, ymax]])
        return SupportPolygon(kind="rectangle", vertices=vertices)
    points = []
    for rot, origin in feet:
        center = origin + rot @ model.foot.wheel_center
        points.append((center - np.array([0.0, 0.0, model.foot.wheel_radius]))[:2])
    return SupportPolygon(kind="segment", vertices=np.array(points))


def contains(
    poly: SupportPolygon, point, tolerance: float = DEFAULT_CONTAINMENT_TOLERANCE
) -> bool:
    """Ground-plane membership test.

    Rectangles use an inclusive-boundary convex test; segments accept points
    within ``tolerance`` of the contact line (exact membership on a line is
    measure-zero, and balance on the wheel line is maintained actively).
    """
    point = np.asarray(point, dtype=float).reshape(2)
    verts = poly.vertices
    if poly.kind == "rectangle":
        for i in range(len(verts)):
            edge = verts[(i + 1) % len(verts)] - verts[i]
            to_point = point - verts[i]
            if edge[0] * to_point[1] - edge[1] * to_point[0] < -1e-12:
                return False
        return True
    a, b = verts
    ab = b - a
    t = float(np.dot(point - a, ab) / np.dot(ab, ab))
    t = min(1.0, max(0.0, t))
    closest = a + t * ab
    return float(np.linalg.norm(point - closest)) <= tolerance


def distance_to_polygon(poly: SupportPolygon, point) -> float:
    """Euclidean ground-plane distance to the support region (0 when inside)."""
    point = np.asarray(point, dtype=float).reshape(2)
    verts = poly.vertices
    if poly.kind == "rectangle" and contains(poly, point, tolerance=0.0):
        return 0.0
    best = math.inf
    n = len(verts) if poly.kind == "rectangle" else 1
    for i in range(n):
        a = verts[i]
        b = verts[(i + 1) % len(verts)]
        ab = b - a
        t = float(np.dot(point - a, ab) / np.dot(ab, ab))
        t = min(1.0, max(0.0, t))
        best = min(best, float(np.linalg.norm(point - (a + t * ab))))
    return best


def contact_points_body(
    model: HumanoidModel, q: JointVector, mode: LocomotionMode
) -> np.ndarray:
    """Ground-contact points expressed in the flight-unit (CoG) body frame.

    Legged mode contacts at the foot-plate corners; wheeled mode at the wheel
    bottoms. The body frame has the whole-robot CoG as origin and the flight
    mount's orientation as axes, matching the rigid-body state the simulator
    integrates.
    """
    frames = link_frames(model, q)
    cog = whole_body_cog(model, q)
    rot_fu, _ = frames[model.flight_mount]
    points = []
    for foot_name in (model.left_foot, model.right_foot):
        rot, origin = frames[foot_name]
        if mode == LocomotionMode.WHEELED:
            center = origin + rot @ model.foot.wheel_center
            points.append(center - np.array([0.0, 0.0, model.foot.wheel_radius]))
        else:
            for corner in _plate_corners(model.foot):
                points.append(origin + rot @ corner)
    return np.array([rot_fu.T @ (p - cog) for p in points])


def flight_unit_pitch(model: HumanoidModel, q: JointVector) -> float:
    """Pitch of the flight-mount link with the support foot ground-parallel."""
    rot, _ = link_frames(model, q)[model.flight_mount]
    return float(rotation_to_euler(rot)[1])


def default_humanoid() -> HumanoidModel:
    """Sagittal-symmetric reduced model at the scale of the physical prototype.

    Four pitch/roll joints per leg, a waist pitch, and the clutch pitch
    carrying the flight unit; masses total 3.343 kg (1.691 kg humanoid plus
    1.652 kg flight unit).
    """
    y_axis = np.array([0.0, 1.0, 0.0])
    x_axis = np.array([1.0, 0.0, 0.0])
    links = (
        Link("ground", None, None, (0, 0, 0), 0.0, (0, 0, 0)),
        Link("left_foot", "ground", None, (0, 0, 0), 0.05, (0, 0, 0.01)),
        Link("left_ankle_pitch", "left_foot", y_axis, (0, 0, 0.02), 0.12, (0, 0, 0.05), (-1.6, 1.6)),
        Link("left_knee", "left_ankle_pitch", y_axis, (0, 0, 0.10), 0.15, (0, 0, 0.05), (-2.2, 2.2)),
        Link("left_hip_pitch", "left_knee", y_axis, (0, 0, 0.10), 0.05, (0, 0, 0.01), (-2.2, 2.2)),
        Link("pelvis", "left_hip_pitch", x_axis, (0, 0, 0.02), 0.25, (0, -0.06, 0.02), (-1.2, 1.2)),
        Link("torso", "pelvis", y_axis, (0, -0.06, 0.04), 0.701, (0, 0, 0.07), (-1.6, 1.6)),
        Link("flight_mount", "torso", y_axis, (-0.03, 0, 0.14), 1.652, (0.03, 0, 0.06), (-2.2, 2.2)),
        Link("right_hip_roll", "pelvis", x_axis, (0, -0.12, 0), 0.05, (0, 0, -0.01), (-1.2, 1.2)),
        Link("right_hip_pitch", "right_hip_roll", y_axis, (0, 0, -0.02), 0.15, (0, 0, -0.05), (-2.2, 2.2)),
        Link("right_knee", "right_hip_pitch", y_axis, (0, 0, -0.10), 0.12, (0, 0, -0.05), (-2.2, 2.2)),
        Link("right_ankle_pitch", "right_knee", y_axis, (0, 0, -0.10), 0.0, (0, 0, 0), (-1.6, 1.6)),
        Link("right_foot", "right_ankle_pitch", None, (0, 0, -0.02), 0.05, (0, 0, 0.01)),
    )
    foot = FootGeometry(
        plate_length=0.10,
        plate_width=0.05,
        wheel_center=(-0.04, 0.0, 0.012),
        wheel_radius=0.012,
    )
    return HumanoidModel(links=links, foot=foot)
