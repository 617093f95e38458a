#!/usr/bin/env python3
"""Rectification maps from start to finish.

Builds the dense map for a distorted camera, inspects which target pixels
have valid source coordinates, crops to the largest centered valid
rectangle of the raw aspect ratio, and remaps a textured image through the
result.  Outputs land in demos/output/.
"""

from pathlib import Path

import numpy as np

from miscalib import ImageSize, Intrinsics
from miscalib.image_io import write_image, write_map
from miscalib.rectify import build_map, largest_valid_rect, rectify_pipeline, validity_mask
from miscalib.textures import synth_texture

out_dir = Path(__file__).parent / "output"
out_dir.mkdir(exist_ok=True)

size = ImageSize(640, 480)

# A pincushion camera (positive k1): border pixels of the rectified frame
# sample outside the raw image, so the validity mask has an invalid ring.
intr = Intrinsics(fu=400.0, fv=400.0, uc=322.0, vc=238.0, k1=0.12, k2=0.03)

rmap = build_map(intr, size)
mask = validity_mask(rmap)
print(f"valid pixels: {mask.sum()} / {mask.size} ({100 * mask.mean():.1f}%)")

rect = largest_valid_rect(mask, size.aspect)
print(f"largest centered valid rect: x0={rect.x0:.2f} y0={rect.y0:.2f} "
      f"w={rect.w:.2f} h={rect.h:.2f} (aspect {rect.w / rect.h:.4f})")

# Corner displacement shows how strongly the map warps.
corner = rmap.grid[0, 0]
print(f"target corner (0,0) samples raw position ({corner[0]:.2f}, {corner[1]:.2f})")

img = synth_texture(size, seed=7)
write_image(out_dir / "raw_texture.png", img)

rectified, cropped_map = rectify_pipeline(img, intr)
write_image(out_dir / "rectified_texture.png", rectified)
write_map(out_dir / "rectified_map.rmap", cropped_map)
print(f"rectified image is raw-sized again: {rectified.shape[1]}x{rectified.shape[0]}")

# The mask itself, rendered as an image for inspection.
write_image(out_dir / "validity_mask.png", mask.astype(float) * 255.0)
print(f"wrote raw_texture.png, rectified_texture.png, validity_mask.png, "
      f"rectified_map.rmap to {out_dir}")
