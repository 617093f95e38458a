"""Average pixel position difference (APPD) between two rectification maps.

APPD is the mean Euclidean distance between the source coordinates that two
cropped/rescaled rectification maps assign to the same target pixel,
expressed as a percentage of the raw-image diagonal.  Identical parameter
sets give exactly 0; dividing by the diagonal makes the value nearly
independent of the resolution the maps were computed at.
"""

from __future__ import annotations

from . import _kernels
from .camera import ImageSize, Intrinsics
from .errors import SizeMismatch
from .rectify import RectifyMap, rectified_map


def appd(m_a: RectifyMap, m_b: RectifyMap) -> float:
    """Mean displacement between two maps, in percent of the raw diagonal.

    Symmetric, non-negative, and zero exactly for identical maps.  Both
    maps must share target and raw sizes.
    """
    if m_a.grid.shape != m_b.grid.shape:
        raise SizeMismatch(
            f"map grids differ in shape: {m_a.grid.shape} vs {m_b.grid.shape}"
        )
    if m_a.raw_size != m_b.raw_size:
        raise SizeMismatch(
            f"map raw sizes differ: {m_a.raw_size} vs {m_b.raw_size}"
        )
    # Row-ordered serial accumulation in double precision.
    mean_dist = _kernels.mean_displacement(m_a.grid, m_b.grid)
    return 100.0 * mean_dist / m_a.raw_size.diagonal


def appd_from_params(theta_a: Intrinsics, theta_b: Intrinsics, size: ImageSize) -> float:
    """APPD between the cropped/rescaled maps of two parameter sets.

    Each map is cropped by its own validity rectangle before comparison.
    """
    return appd(rectified_map(theta_a, size), rectified_map(theta_b, size))
