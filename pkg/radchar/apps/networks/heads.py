"""Task-specific heads."""

from typing import Optional, Tuple

import numpy as np

from radchar.apps.core.exceptions import ShapeError
from radchar.apps.nn.layers import (
    BatchNorm,
    Conv1d,
    Conv2d,
    Dropout,
    Flatten,
    Linear,
    Module,
    ReLU,
    Sequential,
)
from radchar.apps.nn.tensor import Tensor

from .config import ModelConfig

HEAD_KERNEL = 3


class TaskHead(Module):
    """
    conv -> BatchNorm -> ReLU -> Dropout -> flatten -> dense -> ReLU ->
    Dropout -> linear output.

    The convolution is 3x3 on image features and kernel 3 on sequence
    features; a feature vector is read as a one-channel sequence.
    """

    def __init__(
        self,
        feature_shape: Tuple[int, ...],
        out_features: int,
        config: ModelConfig,
        rng: Optional[np.random.Generator] = None,
    ):
        super().__init__()
        self.feature_shape = tuple(feature_shape)
        self.out_features = out_features
        filters = config.head_filters

        if len(self.feature_shape) == 3:
            self.conv_input = self.feature_shape
            conv = Conv2d(self.feature_shape[0], filters, HEAD_KERNEL, rng=rng)
        elif len(self.feature_shape) == 2:
            self.conv_input = self.feature_shape
            conv = Conv1d(self.feature_shape[0], filters, HEAD_KERNEL, rng=rng)
        elif len(self.feature_shape) == 1:
            self.conv_input = (1, self.feature_shape[0])
            conv = Conv1d(1, filters, HEAD_KERNEL, rng=rng)
        else:
            raise ShapeError(f"Heads cannot read features of shape {self.feature_shape}")

        self.features = Sequential(
            conv,
            BatchNorm(filters),
            ReLU(),
            Dropout(config.head_conv_dropout),
            Flatten(),
        )
        flat = self.features.output_shape(self.conv_input)[0]
        self.dense = Sequential(
            Linear(flat, config.head_hidden, rng=rng),
            ReLU(),
            Dropout(config.head_dense_dropout),
            Linear(config.head_hidden, out_features, rng=rng),
        )

    def forward(self, features: Tensor) -> Tensor:
        if tuple(features.shape[1:]) != self.feature_shape:
            raise ShapeError(f"Head expects features {self.feature_shape}, got {tuple(features.shape[1:])}")
        x = features.reshape((features.shape[0],) + self.conv_input)
        return self.dense(self.features(x))

    def output_shape(self, input_shape: Tuple[int, ...]) -> Tuple[int, ...]:
        return self.dense.output_shape(self.features.output_shape(self.conv_input))
