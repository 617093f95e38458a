import numpy as np
import pytest

from miscalib import ImageSize, Intrinsics, scale_intrinsics

# KITTI-like wide-aspect reference calibration used throughout the suite.
KITTI_LIKE = Intrinsics(fu=960.0, fv=960.0, uc=620.0, vc=180.0,
                        k1=-0.37, k2=0.17, k3=-0.04, p1=0.001, p2=0.001)
KITTI_SIZE = ImageSize(1242, 375)


@pytest.fixture
def kitti_like():
    return KITTI_LIKE


@pytest.fixture
def kitti_size():
    return KITTI_SIZE


def small_reference(width=311, height=94):
    """The reference calibration rescaled to a small evaluation grid."""
    size = ImageSize(width, height)
    return scale_intrinsics(KITTI_LIKE, KITTI_SIZE, size), size


def random_intrinsics(rng, base=None, size=None):
    """A perturbed variant of `base` drawn with the default training ranges."""
    if base is None:
        base, size = small_reference()
    f = np.concatenate([
        rng.uniform(0.95, 1.20, 2),
        rng.uniform(0.95, 1.05, 2),
        rng.uniform(0.85, 1.15, 5),
    ])
    return Intrinsics.from_tuple(np.array(base.as_tuple()) * f)
