"""
Shared backbones. Each maps a standardised (B, 2, 512) IQ batch to the
feature map every task head reads.
"""

import math
from typing import List, Optional, Tuple

import numpy as np

from radchar.apps.core.exceptions import ShapeError
from radchar.apps.nn.layers import LayerSpec, Linear, Module, Parameter, Sequential, TransformerEncoderLayer, build_sequential
from radchar.apps.nn.tensor import Tensor, concat
from radchar.apps.waveforms.params import SAMPLES_PER_FRAME

from .config import NUM_TOKENS, BackboneKind, ModelConfig

INPUT_SHAPE = (2, SAMPLES_PER_FRAME)
IMAGE_SIDE = int(math.isqrt(2 * SAMPLES_PER_FRAME))


def _check_input(module: Module, x: Tensor) -> None:
    if x.ndim != 3 or tuple(x.shape[1:]) != INPUT_SHAPE:
        raise ShapeError(f"{type(module).__name__} expects (B, 2, {SAMPLES_PER_FRAME}) input, got {x.shape}")


def conv_block_specs(config: ModelConfig, two_d: bool) -> List[LayerSpec]:
    """``conv_layers`` repetitions of conv, ReLU and max-pool, then dropout."""
    specs = []
    channels = 1 if two_d else INPUT_SHAPE[0]
    for _ in range(config.conv_layers):
        if two_d:
            specs.append(LayerSpec("conv2d", {"in_channels": channels, "out_channels": config.filters,
                                              "kernel_size": (2, 2)}))
            specs.append(LayerSpec("relu"))
            specs.append(LayerSpec("maxpool2d", {"kernel_size": 2}))
        else:
            specs.append(LayerSpec("conv1d", {"in_channels": channels, "out_channels": config.filters,
                                              "kernel_size": 2}))
            specs.append(LayerSpec("relu"))
            specs.append(LayerSpec("maxpool1d", {"kernel_size": 2}))
        channels = config.filters
    specs.append(LayerSpec("dropout", {"rate": config.backbone_dropout}))
    return specs


class CNN2DBackbone(Module):
    """
    Treats the frame as a one-channel 32x32 image: the I samples then the Q
    samples fill the grid row by row.
    """

    def __init__(self, config: ModelConfig, rng: Optional[np.random.Generator] = None):
        super().__init__()
        self.config = config
        self.stack = build_sequential(conv_block_specs(config, two_d=True), rng)
        self.feature_shape = self.output_shape(INPUT_SHAPE)

    def forward(self, x: Tensor) -> Tensor:
        _check_input(self, x)
        return self.stack(x.reshape(x.shape[0], 1, IMAGE_SIDE, IMAGE_SIDE))

    def output_shape(self, input_shape: Tuple[int, ...]) -> Tuple[int, ...]:
        return self.stack.output_shape((1, IMAGE_SIDE, IMAGE_SIDE))


class CNN1DBackbone(Module):
    """Keeps I and Q as two channels of a 512-sample sequence."""

    def __init__(self, config: ModelConfig, rng: Optional[np.random.Generator] = None):
        super().__init__()
        self.config = config
        self.stack = build_sequential(conv_block_specs(config, two_d=False), rng)
        self.feature_shape = self.output_shape(INPUT_SHAPE)

    def forward(self, x: Tensor) -> Tensor:
        _check_input(self, x)
        return self.stack(x)

    def output_shape(self, input_shape: Tuple[int, ...]) -> Tuple[int, ...]:
        return self.stack.output_shape(tuple(input_shape))


def sinusoidal_positions(length: int, width: int) -> np.ndarray:
    """Fixed sine/cosine position table of shape (length, width)."""
    positions = np.arange(length, dtype=np.float64)[:, None]
    rates = np.exp(-math.log(10000.0) * (2 * (np.arange(width) // 2)) / width)
    angles = positions * rates[None, :]
    table = np.where(np.arange(width) % 2 == 0, np.sin(angles), np.cos(angles))
    return table.astype(np.float32)


class IQSTBackbone(Module):
    """
    IQ signal transformer.

    The frame is cut into 8 tokens of 128 samples (I in tokens 0-3, Q in
    tokens 4-7). A shared linear layer embeds every token, a learnable
    summary token is prepended, fixed sinusoidal positions are added and the
    sequence runs through post-norm encoder layers. The summary token's
    final embedding is the feature vector.
    """

    def __init__(self, config: ModelConfig, rng: Optional[np.random.Generator] = None):
        super().__init__()
        self.config = config
        self.token_width = INPUT_SHAPE[0] * INPUT_SHAPE[1] // NUM_TOKENS
        self.embed = Linear(self.token_width, config.d_model, rng=rng)
        self.summary_token = Parameter(np.zeros((1, 1, config.d_model), dtype=np.float32))
        self.positions = sinusoidal_positions(NUM_TOKENS + 1, config.d_model)
        self.encoder = Sequential(*(
            TransformerEncoderLayer(
                config.d_model,
                config.heads,
                config.feed_forward_dim,
                dropout=config.encoder_dropout,
                head_dim=config.attention_head_dim,
                rng=rng,
            )
            for _ in range(config.layers)
        ))
        self.reset_parameters(rng if rng is not None else np.random.default_rng())
        self.feature_shape = self.output_shape(INPUT_SHAPE)

    def reset_parameters(self, rng: np.random.Generator) -> None:
        std = math.sqrt(1.0 / self.config.d_model)
        self.summary_token.data = rng.normal(0.0, std, size=self.summary_token.shape).astype(
            self.summary_token.dtype
        )
        self.summary_token.zero_grad()

    def forward(self, x: Tensor) -> Tensor:
        _check_input(self, x)
        batch = x.shape[0]
        tokens = self.embed(x.reshape(batch, NUM_TOKENS, self.token_width))
        summary = self.summary_token.broadcast_to((batch, 1, self.config.d_model))
        sequence = concat([summary, tokens], axis=1) + self.positions
        encoded = self.encoder(sequence)
        return encoded[:, 0, :]

    def output_shape(self, input_shape: Tuple[int, ...]) -> Tuple[int, ...]:
        if tuple(input_shape) != INPUT_SHAPE:
            raise ShapeError(f"IQSTBackbone expects {INPUT_SHAPE}, got {tuple(input_shape)}")
        return (self.config.d_model,)


def build_backbone(config: ModelConfig, rng: Optional[np.random.Generator] = None) -> Module:
    if config.backbone == BackboneKind.CNN2D:
        return CNN2DBackbone(config, rng)
    if config.backbone == BackboneKind.CNN1D:
        return CNN1DBackbone(config, rng)
    return IQSTBackbone(config, rng)
