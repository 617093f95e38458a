"""Toy-scale CNN regressor for APPD labels produced by the miscalib pipeline."""

from .data import load_dataset, permute_labels, split_indices
from .evaluate import evaluate, mae_from_csv, predict
from .model import AppdRegressor, build_model
from .train import TrainConfig, train

__version__ = "0.1.0"
