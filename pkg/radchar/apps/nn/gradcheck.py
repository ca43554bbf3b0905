"""Finite-difference gradient checker."""

import logging
from typing import Callable, Optional, Sequence

import numpy as np

from .tensor import Tensor, no_grad

logger = logging.getLogger(__name__)


def gradcheck(
    fn: Callable[[], Tensor],
    inputs: Sequence[Tensor],
    eps: float = 1e-5,
    max_entries: Optional[int] = 64,
    rng: Optional[np.random.Generator] = None,
    atol: float = 1e-7,
) -> float:
    """
    Compare analytic gradients against central differences.

    ``fn`` rebuilds a scalar loss from the current values of ``inputs`` (run
    it in float64 for meaningful results). For every input up to
    ``max_entries`` sampled coordinates are perturbed by ``+-eps``; pass
    ``None`` to check them all. Returns the largest per-coordinate relative
    error over all inputs::

        max(|numeric - analytic| - atol, 0) / max(|numeric|, |analytic|, atol)

    ``atol`` absorbs finite-difference roundoff, so coordinates whose true
    gradient is zero (such as a bias feeding straight into a normalisation)
    do not count as errors.
    """
    rng = rng if rng is not None else np.random.default_rng(0)
    for tensor in inputs:
        tensor.data = np.ascontiguousarray(tensor.data)
        tensor.grad = np.zeros_like(tensor.data)
    fn().backward()
    analytic = [t.grad.copy() for t in inputs]

    worst = 0.0
    for position, tensor in enumerate(inputs):
        flat = tensor.data.reshape(-1)
        coords = np.arange(flat.size)
        if max_entries is not None and flat.size > max_entries:
            coords = np.sort(rng.choice(flat.size, size=max_entries, replace=False))

        numeric = np.empty(coords.size, dtype=np.float64)
        with no_grad():
            for slot, coord in enumerate(coords):
                original = flat[coord]
                flat[coord] = original + eps
                upper = fn().item()
                flat[coord] = original - eps
                lower = fn().item()
                flat[coord] = original
                numeric[slot] = (upper - lower) / (2.0 * eps)

        exact = analytic[position].reshape(-1)[coords].astype(np.float64)
        excess = np.maximum(np.abs(numeric - exact) - atol, 0.0)
        errors = excess / np.maximum(np.maximum(np.abs(numeric), np.abs(exact)), atol)
        slot = int(np.argmax(errors))
        error = float(errors[slot])
        logger.debug(
            "gradcheck input %d %s: max relative error %.3e at coordinate %d",
            position, tensor.shape, error, int(coords[slot]),
        )
        worst = max(worst, error)
    return worst
