import json
from pathlib import Path

import numpy as np
from PIL import Image


def make_texture(width, height, seed):
    """Structured grayscale test image, independent of the generator package."""
    rng = np.random.default_rng(seed)
    yy, xx = np.mgrid[0:height, 0:width]
    img = np.zeros((height, width))
    for _ in range(3):
        fx, fy = rng.uniform(-0.3, 0.3, 2)
        img += np.sin(2 * np.pi * (fx * xx + fy * yy) + rng.uniform(0, 2 * np.pi))
    pitch = int(rng.integers(6, 12))
    img[:, ::pitch] += 1.5
    img[::pitch, :] += 1.5
    img += 0.3 * rng.standard_normal((height, width))
    img = (img - img.min()) / (img.max() - img.min()) * 255.0
    return img.astype(np.uint8)


def build_manifest_dir(root: Path, labels, width=32, height=24, warp_scale=0.0):
    """Write a minimal dataset in the manifest.jsonl + PNG layout.

    With warp_scale > 0 each image is a horizontally stretched variant of a
    shared base texture, stretched proportionally to its label, so the
    labels are learnable from pixels.
    """
    root.mkdir(parents=True, exist_ok=True)
    (root / "images").mkdir(exist_ok=True)
    base = make_texture(width, height, seed=7).astype(np.float64)
    header = {
        "format_version": 1,
        "raw_size": [width, height],
        "label_size": [width, height],
        "theta_star": [1.0] * 9,
    }
    lines = [json.dumps(header)]
    for i, label in enumerate(labels):
        sid = f"{i:06d}"
        img = base
        if warp_scale > 0 and label > 0:
            shift = warp_scale * label
            cols = np.clip(np.arange(width) * (1.0 + shift), 0, width - 1)
            lo = np.floor(cols).astype(int)
            hi = np.minimum(lo + 1, width - 1)
            frac = cols - lo
            img = base[:, lo] * (1 - frac) + base[:, hi] * frac
        Image.fromarray(np.clip(img, 0, 255).astype(np.uint8)).save(
            root / "images" / f"{sid}.png")
        lines.append(json.dumps({
            "sample_id": sid,
            "source_image": "base",
            "output_image": f"images/{sid}.png",
            "theta_m": [1.0] * 9,
            "appd_label": float(label),
            "pool_index": i,
        }))
    (root / "manifest.jsonl").write_text("\n".join(lines) + "\n")
    return root / "manifest.jsonl"
