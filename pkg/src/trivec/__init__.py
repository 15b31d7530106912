"""Control and simulation toolkit for a thrust-vectoring trirotor flight unit
mounted on a wheeled humanoid: wrench allocation, feasible-torque pitch
optimization, clutch-angle selection, and the aerial/legged/wheeled
locomotion controllers, validated in a deterministic rigid-body simulator.
"""

from .allocation import (
    AllocationSingularError,
    WrenchAllocator,
    allocate_wrench,
    clamp_commands,
    compose_wrench,
    lambda_from_rotor_commands,
    rotor_commands_from_lambda,
)
from .control import (
    ControllerState,
    GainSet,
    ModeParams,
    SensorBundle,
    control_step,
    switch_mode,
)
from .feasibility import (
    FeasibilityConfig,
    FeasibilityError,
    TorqueRange,
    brute_force_torque_range,
    desired_clutch_angle,
    feasible_torque_range,
    hover_wrench_at_pitch,
    is_wrench_feasible,
    optimize_pitch_angle,
)
from .kinematics import (
    HumanoidModel,
    JointVector,
    SupportPolygon,
    cog_projection,
    contains,
    default_humanoid,
    support_polygon,
    torso_orientation,
)
from .model import (
    GRAVITY,
    LocomotionMode,
    RigidBodyState,
    RotorCommand,
    ThrustVector,
    TrirotorGeometry,
    Wrench,
    allocation_determinant,
    build_allocation_matrix,
)
from .sim import (
    Scenario,
    SimConfig,
    SimulationDiverged,
    Trace,
    contact_forces,
    dynamics_step,
    run_scenario,
)

__all__ = [
    "GRAVITY",
    "AllocationSingularError",
    "ControllerState",
    "FeasibilityConfig",
    "FeasibilityError",
    "GainSet",
    "HumanoidModel",
    "JointVector",
    "LocomotionMode",
    "ModeParams",
    "RigidBodyState",
    "RotorCommand",
    "Scenario",
    "SensorBundle",
    "SimConfig",
    "SimulationDiverged",
    "SupportPolygon",
    "ThrustVector",
    "TorqueRange",
    "Trace",
    "TrirotorGeometry",
    "Wrench",
    "WrenchAllocator",
    "allocate_wrench",
    "allocation_determinant",
    "brute_force_torque_range",
    "build_allocation_matrix",
    "clamp_commands",
    "cog_projection",
    "compose_wrench",
    "contact_forces",
    "contains",
    "control_step",
    "default_humanoid",
    "desired_clutch_angle",
    "dynamics_step",
    "feasible_torque_range",
    "hover_wrench_at_pitch",
    "is_wrench_feasible",
    "lambda_from_rotor_commands",
    "optimize_pitch_angle",
    "rotor_commands_from_lambda",
    "run_scenario",
    "support_polygon",
    "switch_mode",
    "torso_orientation",
]

__version__ = "0.1.0"
