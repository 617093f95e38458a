"""Rectification maps: construction, validity cropping, and image remapping.

A rectification map assigns every pixel of the rectified (target) image a
continuous source coordinate in the raw image.  Building one only needs the
forward distortion model: the target pixel is normalized, distorted, and
denormalized to find where it samples the raw image.

Not every target pixel lands inside the raw image, so the map is cropped to
the largest centered rectangle of the raw aspect ratio whose samples are all
valid, then rescaled back to the raw image size.  Applying the cropped map
to the raw image yields the final rectified sample.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .camera import ImageSize, Intrinsics
from .errors import NoValidRegion, SizeMismatch

RECT_SCALE_RESOLUTION = 1e-3


@dataclass(frozen=True)
class RectifyMap:
    """Dense grid of raw-image source coordinates, one (sx, sy) per target pixel.

    grid has shape (H, W, 2) with grid[v, u] = (sx, sy) in raw-image pixels.
    """

    grid: np.ndarray
    raw_size: ImageSize

    def __post_init__(self):
        if self.grid.ndim != 3 or self.grid.shape[2] != 2:
            raise ValueError(f"map grid must have shape (H, W, 2), got {self.grid.shape}")
        if not np.all(np.isfinite(self.grid)):
            raise ValueError("map grid entries must be finite")

    @property
    def target_size(self) -> ImageSize:
        return ImageSize(width=self.grid.shape[1], height=self.grid.shape[0])


@dataclass(frozen=True)
class CropRect:
    """Axis-aligned rectangle: top-left (x0, y0) and extent (w, h), continuous pixels."""

    x0: float
    y0: float
    w: float
    h: float


def build_map(intr: Intrinsics, size: ImageSize) -> RectifyMap:
    """Rectification map for `intr` on a target grid of `size`.

    Each target pixel is normalized, pushed through the forward distortion
    model, and denormalized to its raw-image source coordinate.  With zero
    distortion the result is the identity grid for any focal lengths and
    principal point.
    """
    grid = _kernels.build_grid(size.width, size.height, intr.fu, intr.fv,
                               intr.uc, intr.vc, intr.k1, intr.k2, intr.k3,
                               intr.p1, intr.p2)
    return RectifyMap(grid=grid, raw_size=size)


def validity_mask(rmap: RectifyMap) -> np.ndarray:
    """Boolean grid: True where the source coordinate lies inside the raw image.

    The raw domain is the closed pixel-center region [0, W-1] x [0, H-1].
    """
    return _kernels.validity(rmap.grid, rmap.raw_size.width, rmap.raw_size.height)


def rect_border_valid(mask: np.ndarray, rect: CropRect) -> bool:
    """True when every border sample of `rect` is valid.

    The border is traced at 1-pixel steps (corners included) and each
    sample is rounded to the nearest pixel, clamped to the grid.
    """
    mask = np.ascontiguousarray(mask, dtype=bool)
    return bool(_kernels.border_all_valid(mask, rect.x0, rect.y0, rect.w, rect.h))


def _centered_rect(size: ImageSize, aspect: float, scale: float) -> CropRect:
    if aspect == size.width / size.height:
        # exact full frame at scale 1, keeping the identity crop bit-exact
        w_max, h_max = float(size.width), float(size.height)
    elif size.width / size.height >= aspect:
        h_max = float(size.height)
        w_max = aspect * h_max
    else:
        w_max = float(size.width)
        h_max = w_max / aspect
    w = scale * w_max
    h = scale * h_max
    return CropRect(x0=size.width / 2.0 - w / 2.0, y0=size.height / 2.0 - h / 2.0, w=w, h=h)


def largest_valid_rect(mask: np.ndarray, aspect: float) -> CropRect:
    """Largest centered rectangle of the given aspect ratio with a valid border.

    Binary search on the scale s in (0, 1] down to a resolution of 1e-3,
    testing border samples at 1-pixel steps.  Requires the center pixel of
    the mask to be valid; raises NoValidRegion otherwise.  The returned
    rectangle is always one whose border test passed.
    """
    h, w = mask.shape
    size = ImageSize(width=w, height=h)
    if not mask[h // 2, w // 2]:
        raise NoValidRegion("mask center pixel is invalid")
    if rect_border_valid(mask, _centered_rect(size, aspect, 1.0)):
        return _centered_rect(size, aspect, 1.0)
    lo, hi = 0.0, 1.0
    while hi - lo > RECT_SCALE_RESOLUTION:
        mid = 0.5 * (lo + hi)
        if rect_border_valid(mask, _centered_rect(size, aspect, mid)):
            lo = mid
        else:
            hi = mid
    if lo == 0.0:
        raise NoValidRegion("no centered rectangle with a valid border was found")
    return _centered_rect(size, aspect, lo)


def _bilinear(values: np.ndarray, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Bilinear sample of `values` (H, W[, C]) at continuous (x, y), edge-clamped."""
    h, w = values.shape[:2]
    x = np.clip(x, 0.0, w - 1.0)
    y = np.clip(y, 0.0, h - 1.0)
    ix = np.minimum(np.floor(x).astype(int), w - 2) if w > 1 else np.zeros_like(x, dtype=int)
    iy = np.minimum(np.floor(y).astype(int), h - 2) if h > 1 else np.zeros_like(y, dtype=int)
    fx = x - ix
    fy = y - iy
    if values.ndim == 3:
        fx = fx[..., None]
        fy = fy[..., None]
    v00 = values[iy, ix]
    v01 = values[iy, ix + 1]
    v10 = values[iy + 1, ix]
    v11 = values[iy + 1, ix + 1]
    top = v00 * (1.0 - fx) + v01 * fx
    bot = v10 * (1.0 - fx) + v11 * fx
    return top * (1.0 - fy) + bot * fy


def crop_rescale_map(rmap: RectifyMap, rect: CropRect) -> RectifyMap:
    """Crop the map to `rect` and rescale it to the raw image size.

    The output entry at (u, v) is the bilinear interpolation of the input
    grid at (x0 + u*w/W, y0 + v*h/H) with (W, H) the raw size; sample
    coordinates are edge-clamped into the grid.  The full-image rect is
    the identity transform.
    """
    out_w, out_h = rmap.raw_size.width, rmap.raw_size.height
    if (rect.x0, rect.y0, rect.w, rect.h) == (0.0, 0.0, float(out_w), float(out_h)) \
            and rmap.grid.shape[:2] == (out_h, out_w):
        return rmap
    grid = _kernels.crop_rescale_grid(rmap.grid, rect.x0, rect.y0, rect.w, rect.h,
                                      out_w, out_h)
    return RectifyMap(grid=grid, raw_size=rmap.raw_size)


def rectified_map(intr: Intrinsics, size: ImageSize) -> RectifyMap:
    """Cropped and rescaled rectification map for `intr`.

    Composes build_map -> validity_mask -> largest_valid_rect ->
    crop_rescale_map; the crop rectangle is derived from this map's own
    validity, and the output is always raw-sized.
    """
    rmap = build_map(intr, size)
    mask = validity_mask(rmap)
    rect = largest_valid_rect(mask, size.aspect)
    return crop_rescale_map(rmap, rect)


def remap_image(img: np.ndarray, rmap: RectifyMap) -> np.ndarray:
    """Resample `img` through the map with bilinear interpolation.

    img is (H, W) or (H, W, C) and must match the map's raw size.  Source
    coordinates outside the raw image clamp to the nearest edge pixel.
    Output intensities stay within [img.min(), img.max()].
    """
    h, w = img.shape[:2]
    if w != rmap.raw_size.width or h != rmap.raw_size.height:
        raise SizeMismatch(
            f"image is {w}x{h} but map raw size is "
            f"{rmap.raw_size.width}x{rmap.raw_size.height}"
        )
    values = np.asarray(img, dtype=np.float64)
    return _bilinear(values, rmap.grid[..., 0], rmap.grid[..., 1])


def rectify_pipeline(img: np.ndarray, intr: Intrinsics):
    """Full rectification: returns the raw-sized rectified image and its map."""
    h, w = img.shape[:2]
    rmap = rectified_map(intr, ImageSize(width=w, height=h))
    return remap_image(img, rmap), rmap
