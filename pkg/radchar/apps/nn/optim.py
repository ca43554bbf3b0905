"""
Adam optimiser.

``adam_step`` is the pure update rule; ``Adam`` keeps the moment estimates
for a model's trainable parameters between steps.
"""

import logging
from typing import Dict, Iterable, Mapping, Tuple

import numpy as np

from radchar.apps.core.exceptions import CheckpointFormatError, ValidationException

from .layers import Parameter

logger = logging.getLogger(__name__)


def adam_step(
    param: np.ndarray,
    grad: np.ndarray,
    m: np.ndarray,
    v: np.ndarray,
    t: int,
    lr: float,
    beta1: float = 0.9,
    beta2: float = 0.999,
    eps: float = 1e-8,
) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    One bias-corrected Adam update. Returns ``(param, m, v)`` as new arrays.

    Raises:
        ValidationException: ``t < 1`` or the shapes disagree.
    """
    if t < 1:
        raise ValidationException(f"Adam step counter must start at 1, got {t}")
    if not (param.shape == grad.shape == m.shape == v.shape):
        raise ValidationException(
            f"Adam shapes differ: param {param.shape}, grad {grad.shape}, m {m.shape}, v {v.shape}"
        )
    m = beta1 * m + (1.0 - beta1) * grad
    v = beta2 * v + (1.0 - beta2) * grad * grad
    m_hat = m / (1.0 - beta1 ** t)
    v_hat = v / (1.0 - beta2 ** t)
    updated = param - lr * m_hat / (np.sqrt(v_hat) + eps)
    return updated.astype(param.dtype), m.astype(param.dtype), v.astype(param.dtype)


class Adam:
    """Adam over named trainable parameters."""

    def __init__(
        self,
        named_parameters: Iterable[Tuple[str, Parameter]],
        lr: float = 5e-4,
        beta1: float = 0.9,
        beta2: float = 0.999,
        eps: float = 1e-8,
    ):
        self.params: Dict[str, Parameter] = {name: p for name, p in named_parameters if p.trainable}
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.t = 0
        self.m = {name: np.zeros_like(p.data) for name, p in self.params.items()}
        self.v = {name: np.zeros_like(p.data) for name, p in self.params.items()}

    def zero_grad(self) -> None:
        for param in self.params.values():
            param.zero_grad()

    def step(self) -> None:
        self.t += 1
        for name, param in self.params.items():
            grad = param.grad if param.grad is not None else np.zeros_like(param.data)
            param.data, self.m[name], self.v[name] = adam_step(
                param.data, grad, self.m[name], self.v[name], self.t,
                self.lr, self.beta1, self.beta2, self.eps,
            )

    def state_dict(self) -> Dict[str, object]:
        return {
            "t": self.t,
            "m": {name: value.copy() for name, value in self.m.items()},
            "v": {name: value.copy() for name, value in self.v.items()},
        }

    def load_state_dict(self, state: Mapping[str, object]) -> None:
        m, v = state["m"], state["v"]
        if set(m) != set(self.params) or set(v) != set(self.params):
            raise CheckpointFormatError("Optimiser state does not match the model parameters")
        for name, param in self.params.items():
            if m[name].shape != param.shape or v[name].shape != param.shape:
                raise CheckpointFormatError(f"Optimiser moment for {name} has the wrong shape")
            self.m[name] = np.array(m[name], dtype=param.dtype)
            self.v[name] = np.array(v[name], dtype=param.dtype)
        self.t = int(state["t"])
        logger.debug("Restored Adam state at step %d", self.t)
