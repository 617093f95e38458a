"""Training loop and command-line entry point.

MSE loss between predictions and APPD labels, Adam, Xavier initialization,
dropout; deterministic given the seed (seeded model init, split, and batch
order; single-threaded data pipeline).  Emits metrics.json, a per-epoch
loss log, and a validation predictions CSV.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import torch

from .data import load_dataset, permute_labels, split_indices
from .evaluate import evaluate, predict
from .model import build_model


@dataclass
class TrainConfig:
    manifest: str
    out_dir: str
    downscale: int = 2
    epochs: int = 20
    batch_size: int = 32
    learning_rate: float = 1e-3
    dropout: float = 0.3
    validation_split: float = 0.2
    seed: int = 0
    permute: bool = False  # shuffled-label control run
    bins: int = 10

    def __post_init__(self):
        if not 0.0 < self.validation_split < 1.0:
            raise ValueError("validation_split must lie in (0, 1)")
        if self.epochs < 1 or self.batch_size < 1 or self.downscale < 1:
            raise ValueError("epochs, batch_size and downscale must be positive")


def train(cfg: TrainConfig):
    """Train a regressor on a generated dataset; returns (model, metrics)."""
    torch.manual_seed(cfg.seed)
    torch.use_deterministic_algorithms(True)

    ds = load_dataset(cfg.manifest, downscale=cfg.downscale)
    if cfg.permute:
        ds = permute_labels(ds, cfg.seed + 1)
    train_idx, val_idx = split_indices(len(ds.labels), cfg.validation_split, cfg.seed)
    x_train, y_train = ds.images[train_idx], ds.labels[train_idx]
    x_val, y_val = ds.images[val_idx], ds.labels[val_idx]
    val_ids = [ds.sample_ids[i] for i in val_idx]

    # predict-the-train-mean reference on the validation labels
    baseline_mae = float(torch.abs(y_val - y_train.mean()).mean())

    model = build_model(ds.input_size, cfg.dropout, cfg.seed)
    optimizer = torch.optim.Adam(model.parameters(), lr=cfg.learning_rate)
    loss_fn = torch.nn.MSELoss()
    order_rng = np.random.default_rng(cfg.seed + 2)

    epoch_log = []
    started = time.perf_counter()
    for epoch in range(1, cfg.epochs + 1):
        model.train()
        order = order_rng.permutation(len(y_train))
        total = 0.0
        for start in range(0, len(order), cfg.batch_size):
            batch = order[start:start + cfg.batch_size]
            optimizer.zero_grad()
            loss = loss_fn(model(x_train[batch]), y_train[batch])
            loss.backward()
            optimizer.step()
            total += float(loss.detach()) * len(batch)
        train_loss = total / len(y_train)

        val_pred = torch.from_numpy(predict(model, x_val)).float()
        val_loss = float(loss_fn(val_pred, y_val))
        val_mae = float(torch.abs(val_pred - y_val).mean())
        epoch_log.append({"epoch": epoch, "train_loss": train_loss,
                          "val_loss": val_loss, "val_mae": val_mae})
        print(f"epoch {epoch:3d}  train_loss {train_loss:.6f}  "
              f"val_loss {val_loss:.6f}  val_mae {val_mae:.6f}")
    elapsed = time.perf_counter() - started

    out_dir = Path(cfg.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    _, final_val_mae, _ = evaluate(model, x_val, y_val, val_ids,
                                   csv_path=out_dir / "predictions.csv",
                                   n_bins=cfg.bins)
    metrics = {
        "config": dataclasses.asdict(cfg),
        "n_train": int(len(y_train)),
        "n_val": int(len(y_val)),
        "baseline_mae": baseline_mae,
        "final_val_mae": final_val_mae,
        "train_seconds": elapsed,
        "epochs": epoch_log,
    }
    with open(out_dir / "metrics.json", "w") as f:
        json.dump(metrics, f, indent=2, sort_keys=True)
    print(f"final val MAE {final_val_mae:.6f} vs mean-predictor baseline "
          f"{baseline_mae:.6f} ({elapsed:.0f} s)")
    return model, metrics


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="miscalib-train",
        description="Train the APPD regression network on a generated dataset",
    )
    parser.add_argument("--manifest", required=True)
    parser.add_argument("--out", required=True, help="output directory for metrics")
    parser.add_argument("--downscale", type=int, default=2)
    parser.add_argument("--epochs", type=int, default=20)
    parser.add_argument("--batch-size", type=int, default=32)
    parser.add_argument("--learning-rate", type=float, default=1e-3)
    parser.add_argument("--dropout", type=float, default=0.3)
    parser.add_argument("--validation-split", type=float, default=0.2)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--bins", type=int, default=10)
    parser.add_argument("--permute-labels", action="store_true",
                        help="shuffled-label control run")
    args = parser.parse_args(argv)
    cfg = TrainConfig(
        manifest=args.manifest, out_dir=args.out, downscale=args.downscale,
        epochs=args.epochs, batch_size=args.batch_size,
        learning_rate=args.learning_rate, dropout=args.dropout,
        validation_split=args.validation_split, seed=args.seed,
        permute=args.permute_labels, bins=args.bins,
    )
    train(cfg)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
