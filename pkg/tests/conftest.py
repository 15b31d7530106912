import numpy as np
import pytest

from trivec.control import GainSet
from trivec.kinematics import default_humanoid
from trivec.model import TrirotorGeometry


@pytest.fixture
def geom():
    """Geometry with the prototype-scale limits used throughout the examples."""
    return TrirotorGeometry(
        l=0.2,
        h=0.1,
        d_f=0.15,
        d_r=0.3,
        mass=3.343,
        inertia=np.diag([0.10, 0.12, 0.09]),
    )


@pytest.fixture
def humanoid():
    return default_humanoid()


@pytest.fixture
def gains():
    """The bundled controller gains (same values as presets/table1.cfg)."""
    return GainSet(
        attitude_p=[3.0, 3.5, 2.0],
        attitude_i=[0.3, 0.3, 0.2],
        attitude_d=[1.0, 1.2, 0.8],
        position_p=[4.0, 4.0, 4.0],
        position_i=[0.5, 0.5, 0.5],
        position_d=[3.6, 3.6, 3.6],
        wheel_z_p=4.0,
        wheel_z_i=0.5,
        wheel_z_d=2.0,
        force_feedback_gain=0.5,
    )


def random_geometry(rng) -> TrirotorGeometry:
    """Valid geometry with randomized links, mass, and limits."""
    moments = rng.uniform(0.02, 0.5, 3)
    return TrirotorGeometry(
        l=rng.uniform(0.05, 0.5),
        h=rng.uniform(0.0, 0.3),
        d_f=rng.uniform(0.05, 0.5),
        d_r=rng.uniform(0.05, 0.5),
        mass=rng.uniform(0.5, 10.0),
        inertia=np.diag(moments),
        lambda_min=0.0,
        lambda_max=rng.uniform(5.0, 40.0),
        alpha_min=-rng.uniform(1.0, 2.5),
        alpha_max=rng.uniform(1.0, 2.5),
    )
