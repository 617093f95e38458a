"""Model evaluation: per-sample predictions, MAE, quantized-label summaries."""

from __future__ import annotations

import csv
from pathlib import Path

import numpy as np
import torch


@torch.no_grad()
def predict(model, images: torch.Tensor, batch_size: int = 64) -> np.ndarray:
    if tuple(images.shape[-2:][::-1]) != tuple(model.input_size):
        raise ValueError(
            f"model expects {model.input_size} inputs, images are "
            f"{tuple(images.shape[-2:][::-1])}"
        )
    model.eval()
    out = []
    for start in range(0, len(images), batch_size):
        out.append(model(images[start:start + batch_size]))
    return torch.cat(out).numpy().astype(np.float64)


def evaluate(model, images, labels, sample_ids, csv_path=None, n_bins: int = 10):
    """Predictions, MAE, and per-bin prediction summaries.

    Bins quantize the true labels over [0, max]; each summary row carries
    the count and the prediction statistics of its bin, mirroring a
    predicted-vs-true scatter collapsed into quantiles.
    """
    preds = predict(model, images)
    truth = labels.numpy().astype(np.float64)
    if not np.all(np.isfinite(preds)):
        raise ValueError("model produced non-finite predictions")
    mae = float(np.abs(preds - truth).mean())

    hi = float(truth.max())
    edges = np.linspace(0.0, hi if hi > 0 else 1.0, n_bins + 1)
    summary = []
    for i in range(n_bins):
        lo, up = edges[i], edges[i + 1]
        sel = (truth >= lo) & (truth <= up) if i == n_bins - 1 else (truth >= lo) & (truth < up)
        chunk = preds[sel]
        summary.append({
            "bin_lo": float(lo),
            "bin_hi": float(up),
            "count": int(sel.sum()),
            "pred_mean": float(chunk.mean()) if len(chunk) else float("nan"),
            "pred_std": float(chunk.std()) if len(chunk) else float("nan"),
        })

    if csv_path is not None:
        csv_path = Path(csv_path)
        csv_path.parent.mkdir(parents=True, exist_ok=True)
        with open(csv_path, "w", newline="") as f:
            writer = csv.writer(f)
            writer.writerow(["sample_id", "true_appd", "predicted_appd"])
            for sid, t, p in zip(sample_ids, truth, preds):
                writer.writerow([sid, repr(float(t)), repr(float(p))])
    return preds, mae, summary


def mae_from_csv(csv_path) -> float:
    """Recompute the MAE from an emitted predictions file."""
    total = 0.0
    n = 0
    with open(csv_path, newline="") as f:
        reader = csv.DictReader(f)
        for row in reader:
            total += abs(float(row["true_appd"]) - float(row["predicted_appd"]))
            n += 1
    return total / n
