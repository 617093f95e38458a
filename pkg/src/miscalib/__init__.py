"""Semi-synthetic camera miscalibration toolkit.

Generates miscalibration datasets from raw images plus one known
calibration, computes the average pixel position difference (APPD) between
rectification maps, and runs point-projection experiments relating APPD to
reprojection error.
"""

from .camera import ImageSize, Intrinsics, distort_normalized, normalized_from_pixel, \
    pixel_from_normalized, project, scale_intrinsics, undistort_normalized
from .errors import (
    BehindCamera,
    EmptyInputDir,
    MiscalibError,
    MissingKey,
    NonConvergence,
    NonPositiveFocal,
    NoValidRegion,
    ParseError,
    SizeMismatch,
    TooFewValidPoints,
    ValidationError,
    VersionMismatch,
)
from .metric import appd, appd_from_params
from .rectify import CropRect, RectifyMap, build_map, crop_rescale_map, largest_valid_rect, \
    rectified_map, rectify_pipeline, remap_image, validity_mask

__version__ = "0.1.0"
