"""The regression network: four strided conv blocks, two dense layers.

Every layer except the final linear output uses ReLU.  Weights use Xavier
(Glorot) uniform initialization; dropout sits in front of the dense stack.
"""

from __future__ import annotations

import torch
from torch import nn

CHANNELS = (8, 16, 24, 32)
HIDDEN = 64


class AppdRegressor(nn.Module):
    def __init__(self, input_size: tuple, dropout: float = 0.3):
        """input_size is (W, H) of the downscaled input images."""
        super().__init__()
        w, h = input_size
        blocks = []
        in_ch = 1
        for out_ch in CHANNELS:
            blocks += [nn.Conv2d(in_ch, out_ch, kernel_size=3, stride=2, padding=1),
                       nn.ReLU()]
            in_ch = out_ch
            w = (w + 1) // 2
            h = (h + 1) // 2
        self.features = nn.Sequential(*blocks)
        self.head = nn.Sequential(
            nn.Flatten(),
            nn.Dropout(dropout),
            nn.Linear(in_ch * w * h, HIDDEN),
            nn.ReLU(),
            nn.Dropout(dropout),
            nn.Linear(HIDDEN, 1),
        )
        self.input_size = tuple(input_size)
        self.apply(_init_xavier)

    def forward(self, x):
        return self.head(self.features(x)).squeeze(-1)


def _init_xavier(module):
    if isinstance(module, (nn.Conv2d, nn.Linear)):
        nn.init.xavier_uniform_(module.weight)
        nn.init.zeros_(module.bias)


def build_model(input_size: tuple, dropout: float, seed: int) -> AppdRegressor:
    torch.manual_seed(seed)
    return AppdRegressor(input_size, dropout=dropout)
