"""
Hard-parameter-sharing multi-task model: one backbone, one classification
head and four regression heads, all reading the same features.
"""

import logging
from dataclasses import dataclass
from typing import Dict, Optional

import numpy as np

from radchar.apps.core.exceptions import ShapeError
from radchar.apps.datasets.preprocessing import LABEL_NAMES
from radchar.apps.nn.init import lecun_init, seed_dropout
from radchar.apps.nn.layers import Module, ModuleDict
from radchar.apps.nn.tensor import Tensor, concat

from .backbones import INPUT_SHAPE, build_backbone
from .config import NUM_CLASSES, ModelConfig
from .heads import TaskHead

logger = logging.getLogger(__name__)

CLASS_TASK = "class"
TASK_NAMES = (CLASS_TASK,) + LABEL_NAMES


@dataclass
class TaskOutputs:
    """Per-task predictions for one batch. ``reg`` is in normalised label space."""

    class_logits: Tensor
    reg: Tensor

    def __post_init__(self):
        if self.class_logits.shape[0] != self.reg.shape[0]:
            raise ShapeError(
                f"Batch sizes disagree: logits {self.class_logits.shape}, regression {self.reg.shape}"
            )

    def class_probabilities(self) -> np.ndarray:
        logits = self.class_logits.data.astype(np.float64)
        shifted = np.exp(logits - logits.max(axis=1, keepdims=True))
        return shifted / shifted.sum(axis=1, keepdims=True)

    def predicted_classes(self) -> np.ndarray:
        return self.class_logits.data.argmax(axis=1)


class MTLModel(Module):
    def __init__(self, config: ModelConfig, rng: Optional[np.random.Generator] = None):
        super().__init__()
        self.config = config.validate()
        self.backbone = build_backbone(config, rng)
        feature_shape = self.backbone.feature_shape
        heads = {CLASS_TASK: TaskHead(feature_shape, NUM_CLASSES, config, rng)}
        for name in LABEL_NAMES:
            heads[name] = TaskHead(feature_shape, 1, config, rng)
        self.heads = ModuleDict(heads)

    @property
    def feature_shape(self):
        return self.backbone.feature_shape

    def features(self, x: Tensor) -> Tensor:
        return self.backbone(x)

    def forward(self, x: Tensor) -> TaskOutputs:
        shared = self.backbone(x)
        logits = self.heads[CLASS_TASK](shared)
        reg = concat([self.heads[name](shared) for name in LABEL_NAMES], axis=1)
        return TaskOutputs(class_logits=logits, reg=reg)

    def output_shape(self, input_shape=INPUT_SHAPE) -> Dict[str, tuple]:
        features = self.backbone.output_shape(input_shape)
        return {name: head.output_shape(features) for name, head in self.heads.items()}

    def backbone_parameter_count(self) -> int:
        return self.backbone.num_parameters()


def build_model(config: ModelConfig, seed: int = 0) -> MTLModel:
    """
    Build a model whose initial weights and dropout masks follow from ``seed``.
    """
    model = MTLModel(config)
    init_rng, dropout_rng = (np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(2))
    lecun_init(model, init_rng)
    seed_dropout(model, dropout_rng)
    logger.info(
        "Built %s model with %d parameters (%d in the backbone)",
        config.backbone.value,
        model.num_parameters(),
        model.backbone_parameter_count(),
    )
    return model
