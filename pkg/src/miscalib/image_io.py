"""PNG image I/O and the binary rectification-map dump format.

Images are 8-bit grayscale or RGB PNG on disk and float64 arrays in memory
((H, W) or (H, W, 3), values in [0, 255]).

Map dumps are little-endian binary: magic "RMAP", four u32 fields
(target W, target H, raw W, raw H), then W*H (sx, sy) float64 pairs in
row-major order.
"""

from __future__ import annotations

import struct

import numpy as np
from PIL import Image

from .camera import ImageSize
from .errors import ParseError
from .rectify import RectifyMap

_MAP_MAGIC = b"RMAP"
_MAP_HEADER = struct.Struct("<4sIIII")


def read_image(path) -> np.ndarray:
    """Load a PNG as float64, (H, W) for grayscale or (H, W, 3) for RGB."""
    with Image.open(path) as im:
        if im.mode not in ("L", "RGB"):
            im = im.convert("RGB" if im.mode in ("RGBA", "P", "CMYK") else "L")
        return np.asarray(im, dtype=np.float64)


def write_image(path, img: np.ndarray) -> None:
    """Write a float array (values in [0, 255]) as an 8-bit PNG."""
    data = np.clip(np.rint(img), 0, 255).astype(np.uint8)
    if data.ndim not in (2, 3) or (data.ndim == 3 and data.shape[2] != 3):
        raise ValueError(f"expected (H, W) or (H, W, 3) image, got shape {data.shape}")
    Image.fromarray(data).save(path, format="PNG")


def image_size(img: np.ndarray) -> ImageSize:
    return ImageSize(width=img.shape[1], height=img.shape[0])


def write_map(path, rmap: RectifyMap) -> None:
    ts = rmap.target_size
    header = _MAP_HEADER.pack(_MAP_MAGIC, ts.width, ts.height,
                              rmap.raw_size.width, rmap.raw_size.height)
    with open(path, "wb") as f:
        f.write(header)
        f.write(np.ascontiguousarray(rmap.grid, dtype="<f8").tobytes())


def read_map(path) -> RectifyMap:
    with open(path, "rb") as f:
        header = f.read(_MAP_HEADER.size)
        if len(header) != _MAP_HEADER.size:
            raise ParseError(f"truncated map header in {path}")
        magic, w, h, raw_w, raw_h = _MAP_HEADER.unpack(header)
        if magic != _MAP_MAGIC:
            raise ParseError(f"bad map magic {magic!r} in {path}")
        payload = f.read()
    expected = w * h * 2 * 8
    if len(payload) != expected:
        raise ParseError(
            f"map payload in {path} is {len(payload)} bytes, expected {expected}"
        )
    grid = np.frombuffer(payload, dtype="<f8").astype(np.float64).reshape(h, w, 2)
    return RectifyMap(grid=grid, raw_size=ImageSize(width=raw_w, height=raw_h))
