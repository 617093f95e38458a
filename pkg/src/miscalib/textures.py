"""Synthetic textured test images.

Rectification warps are only observable on images with structure, so the
generator layers smoothed noise, gratings, and a grid of lines: enough
high-frequency content that resampling through a perturbed map leaves a
visible trace at every scale.
"""

from __future__ import annotations

import numpy as np
from scipy import ndimage

from .camera import ImageSize


def synth_texture(size: ImageSize, seed: int, channels: int = 1) -> np.ndarray:
    """A seeded textured image in [0, 255], shape (H, W) or (H, W, 3)."""
    rng = np.random.default_rng(seed)
    h, w = size.height, size.width
    img = np.zeros((h, w))

    # smoothed noise at two scales
    img += ndimage.gaussian_filter(rng.standard_normal((h, w)), sigma=max(2, min(h, w) // 24))
    img += 0.5 * ndimage.gaussian_filter(rng.standard_normal((h, w)), sigma=1.5)

    # random-phase gratings
    yy, xx = np.mgrid[0:h, 0:w]
    for _ in range(3):
        fx, fy = rng.uniform(-0.35, 0.35, 2)
        phase = rng.uniform(0, 2 * np.pi)
        img += 0.4 * np.sin(2 * np.pi * (fx * xx + fy * yy) + phase)

    # line grid with a random pitch and offset
    pitch = int(rng.integers(max(6, w // 24), max(8, w // 10)))
    off_x, off_y = int(rng.integers(0, pitch)), int(rng.integers(0, pitch))
    img[:, off_x::pitch] += 1.2
    img[off_y::pitch, :] += 1.2

    lo, hi = img.min(), img.max()
    img = (img - lo) / (hi - lo) * 255.0
    if channels == 3:
        shade = np.stack([
            img,
            np.roll(img, w // 7, axis=1),
            255.0 - img,
        ], axis=-1)
        return shade
    return img
