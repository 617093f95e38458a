"""Dataset access: the manifest.jsonl + PNG layout written by `miscalib generate`.

Only the documented wire format is consumed here; nothing is imported from
the generator package.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import torch
from PIL import Image


@dataclass
class LoadedDataset:
    sample_ids: list
    images: torch.Tensor  # (N, 1, H, W) float32 in [0, 1]
    labels: torch.Tensor  # (N,) float32
    raw_size: tuple       # (W, H) from the manifest header
    input_size: tuple     # (W, H) after downscaling


def load_dataset(manifest_path, downscale: int = 1) -> LoadedDataset:
    """Read every sample of a dataset into memory, downscaled bilinearly.

    Aborts with the offending sample named on any read error.
    """
    manifest_path = Path(manifest_path)
    base = manifest_path.parent
    with open(manifest_path) as f:
        lines = f.read().splitlines()
    if not lines:
        raise ValueError(f"{manifest_path}: empty manifest")
    header = json.loads(lines[0])
    raw_w, raw_h = header["raw_size"]
    in_w, in_h = max(1, round(raw_w / downscale)), max(1, round(raw_h / downscale))

    sample_ids = []
    images = []
    labels = []
    for line in lines[1:]:
        if not line.strip():
            continue
        rec = json.loads(line)
        sid = rec["sample_id"]
        path = base / rec["output_image"]
        try:
            with Image.open(path) as im:
                im = im.convert("L")
                if downscale != 1:
                    im = im.resize((in_w, in_h), Image.BILINEAR)
                arr = np.asarray(im, dtype=np.float32) / 255.0
        except Exception as exc:
            raise RuntimeError(f"sample {sid}: cannot load {path}: {exc}") from exc
        sample_ids.append(sid)
        images.append(torch.from_numpy(arr)[None, :, :])
        labels.append(float(rec["appd_label"]))
    if not images:
        raise ValueError(f"{manifest_path}: no records")
    return LoadedDataset(
        sample_ids=sample_ids,
        images=torch.stack(images),
        labels=torch.tensor(labels, dtype=torch.float32),
        raw_size=(raw_w, raw_h),
        input_size=(in_w, in_h),
    )


def split_indices(n: int, validation_split: float, seed: int):
    """Seeded permutation split into (train_idx, val_idx)."""
    if not 0.0 < validation_split < 1.0:
        raise ValueError("validation_split must lie in (0, 1)")
    order = np.random.default_rng(seed).permutation(n)
    n_val = max(1, int(round(validation_split * n)))
    return order[n_val:].copy(), order[:n_val].copy()


def permute_labels(ds: LoadedDataset, seed: int) -> LoadedDataset:
    """The same dataset with image-label pairing destroyed (control runs)."""
    order = np.random.default_rng(seed).permutation(len(ds.labels))
    return LoadedDataset(sample_ids=ds.sample_ids, images=ds.images,
                         labels=ds.labels[order], raw_size=ds.raw_size,
                         input_size=ds.input_size)
