"""
Compound multi-task loss: a weighted sum of one cross-entropy term and four
L1 terms computed in normalised label space.
"""

from dataclasses import dataclass
from typing import Dict

import numpy as np

from radchar.apps.core.exceptions import ShapeError
from radchar.apps.networks.model import LABEL_NAMES, TaskOutputs
from radchar.apps.nn.losses import cross_entropy, l1_loss
from radchar.apps.nn.tensor import Tensor

from .config import WEIGHT_NAMES, TaskWeights


@dataclass(frozen=True, eq=False)
class Targets:
    classes: np.ndarray  # (B,) int
    reg: np.ndarray  # (B, 4) normalised, LABEL_NAMES order

    def __post_init__(self):
        if self.reg.shape != (len(self.classes), len(LABEL_NAMES)):
            raise ShapeError(f"Regression targets must be ({len(self.classes)}, 4), got {self.reg.shape}")


@dataclass
class LossBreakdown:
    total: Tensor
    weighted: Dict[str, float]

    def as_dict(self) -> Dict[str, float]:
        return {"total": self.total.item(), **self.weighted}


def task_losses(outputs: TaskOutputs, targets: Targets) -> Dict[str, Tensor]:
    """Unweighted loss of every task, keyed by ``WEIGHT_NAMES``."""
    if outputs.reg.shape != targets.reg.shape:
        raise ShapeError(f"Regression outputs {outputs.reg.shape} do not match targets {targets.reg.shape}")
    losses = {"class": cross_entropy(outputs.class_logits, targets.classes)}
    for column, name in enumerate(LABEL_NAMES):
        losses[name] = l1_loss(outputs.reg[:, column], targets.reg[:, column])
    return losses


def mtl_loss_breakdown(outputs: TaskOutputs, targets: Targets, weights: TaskWeights) -> LossBreakdown:
    losses = task_losses(outputs, targets)
    total = None
    weighted = {}
    for name, weight in zip(WEIGHT_NAMES, weights.as_tuple()):
        term = losses[name] * weight
        weighted[name] = term.item()
        total = term if total is None else total + term
    return LossBreakdown(total=total, weighted=weighted)


def mtl_loss(outputs: TaskOutputs, targets: Targets, weights: TaskWeights) -> Tensor:
    """``w_class * CE + sum(w_i * L1_i)`` as a differentiable scalar."""
    return mtl_loss_breakdown(outputs, targets, weights).total
