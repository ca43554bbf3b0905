"""Parameter initialisation and dropout seeding."""

import math

import numpy as np

from .layers import Dropout, Module


def lecun_init(module: Module, rng: np.random.Generator) -> Module:
    """
    Re-draw every weighted layer under ``module`` from ``Normal(0, 1/fan_in)``
    and zero its bias. Modules with extra learnable tensors initialise them
    through their own ``reset_parameters(rng)``.
    """
    for layer in module.modules():
        if hasattr(layer, "fan_in"):
            std = math.sqrt(1.0 / layer.fan_in)
            layer.weight.data = rng.normal(0.0, std, size=layer.weight.shape).astype(layer.weight.dtype)
            layer.weight.zero_grad()
            if layer.bias is not None:
                layer.bias.data = np.zeros_like(layer.bias.data)
                layer.bias.zero_grad()
        elif hasattr(layer, "reset_parameters"):
            layer.reset_parameters(rng)
    return module


def seed_dropout(module: Module, rng: np.random.Generator) -> Module:
    """Point every dropout layer under ``module`` at one shared generator."""
    for layer in module.modules():
        if isinstance(layer, Dropout):
            layer.rng = rng
    return module
