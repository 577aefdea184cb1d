import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from intentctl.model import RobotModel, builtin_robot_path, load_robot


def make_twolink(m1=1.3, m2=0.9, l1=0.7, c1=0.35, c2=0.3, i1=0.02, i2=0.015):
    """Planar two-link arm matching the closed-form oracle conventions.

    Joints rotate about world z, links extend along x at q = 0, gravity is
    along -y so the motion stays in the xy plane.
    """
    tiny = 1e-6  # keep inertia tensors positive definite
    return RobotModel(
        name="twolink",
        axes=np.array([[0.0, 0.0, 1.0], [0.0, 0.0, 1.0]]),
        offsets=np.array([[0.0, 0.0, 0.0], [l1, 0.0, 0.0]]),
        masses=np.array([m1, m2]),
        coms=np.array([[c1, 0.0, 0.0], [c2, 0.0, 0.0]]),
        inertias=np.array([
            [[tiny, 0, 0], [0, tiny, 0], [0, 0, i1]],
            [[tiny, 0, 0], [0, tiny, 0], [0, 0, i2]],
        ]),
        gravity=np.array([0.0, -9.81, 0.0]),
        ee_offset=np.array([0.55, 0.0, 0.0]),
    )


@pytest.fixture(scope="session")
def arm():
    return load_robot(builtin_robot_path())


@pytest.fixture(scope="session")
def twolink():
    return make_twolink()
