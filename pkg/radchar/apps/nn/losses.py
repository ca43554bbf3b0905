"""Loss functions returning scalar tensors."""

from typing import Union

import numpy as np

from radchar.apps.core.exceptions import ErrorDetail, ShapeError, ValidationException

from .tensor import Tensor


def cross_entropy(logits: Tensor, labels: np.ndarray) -> Tensor:
    """
    Mean over the batch of ``-log softmax(logits)[label]``.

    Raises:
        ShapeError: ``logits`` is not (B, K) or ``labels`` is not (B,).
        ValidationException: A label is outside ``0..K-1``.
    """
    labels = np.asarray(labels)
    if logits.ndim != 2 or labels.shape != (logits.shape[0],):
        raise ShapeError(f"cross_entropy expects (B, K) logits and (B,) labels, got {logits.shape} and {labels.shape}")
    num_classes = logits.shape[1]
    if labels.size and (labels.min() < 0 or labels.max() >= num_classes):
        raise ValidationException(
            "Class label out of range",
            details=[ErrorDetail(message=f"labels must lie in 0..{num_classes - 1}", code="label_range",
                                 field="labels", context={"min": int(labels.min()), "max": int(labels.max())})],
        )
    log_probs = logits.log_softmax(axis=-1)
    picked = log_probs[np.arange(labels.shape[0]), labels.astype(np.intp)]
    return -picked.mean()


def l1_loss(pred: Tensor, target: Union[Tensor, np.ndarray]) -> Tensor:
    """Mean absolute error; ``target`` is treated as a constant."""
    target_data = target.data if isinstance(target, Tensor) else np.asarray(target)
    if pred.shape != target_data.shape:
        raise ShapeError(f"l1_loss shapes differ: pred {pred.shape}, target {target_data.shape}")
    return (pred - target_data.astype(pred.dtype)).abs().mean()
