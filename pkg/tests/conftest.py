import numpy as np
import pytest

from icop.geometry import build_prism_tunnel, transform_scene
from icop.kinematics import JointParams, RobotChain
from icop.scenario import load_bundled
from icop.transforms import homogeneous, rot_y


@pytest.fixture(scope="session")
def straight_chain() -> RobotChain:
    """Six 1 m links along a common axis, no twists or offsets."""
    joints = tuple(JointParams(a=1.0, alpha=0.0, d=0.0) for _ in range(6))
    return RobotChain(joints=joints, tool_offset=np.eye(4))


@pytest.fixture(scope="session")
def c4():
    return load_bundled("c4")


@pytest.fixture(scope="session")
def gp50_chain(c4):
    return c4.chain


@pytest.fixture(scope="session")
def gp50_capsules(c4):
    return c4.capsules


@pytest.fixture(scope="session")
def square_tunnel():
    """Unit-square prism tunnel (half-width 0.5, depth 2) at the origin."""
    section = np.array([[0.5, -0.5], [0.5, 0.5], [-0.5, 0.5], [-0.5, -0.5]])
    return build_prism_tunnel(section, depth=2.0)


def random_tunnel(rng: np.random.Generator):
    """A jittered convex polygon prism placed with a random rigid pose."""
    k = int(rng.integers(3, 8))
    angles = np.sort(rng.uniform(0.0, 2 * np.pi, k))
    while np.min(np.diff(np.concatenate([angles, [angles[0] + 2 * np.pi]]))) < 0.3:
        angles = np.sort(rng.uniform(0.0, 2 * np.pi, k))
    radius = rng.uniform(0.3, 0.8)
    section = radius * np.column_stack([np.cos(angles), np.sin(angles)])
    scene = build_prism_tunnel(section, depth=float(rng.uniform(0.5, 2.0)))
    T = homogeneous(rot_y(rng.uniform(-np.pi, np.pi)), rng.uniform(-1.0, 1.0, 3))
    return transform_scene(scene, T)
