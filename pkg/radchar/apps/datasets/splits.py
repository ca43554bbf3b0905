"""
Deterministic train/validation/test partition.
"""

from dataclasses import dataclass

import numpy as np

from radchar.apps.core.exceptions import DatasetConfigValidationError
from radchar.apps.core.validators import RangeValidator

TRAIN_PERCENT = 70
VAL_PERCENT = 15
MIN_SPLIT_COUNT = 10


@dataclass(frozen=True, eq=False)
class SplitIndices:
    """Sorted, pairwise disjoint record indices."""

    train: np.ndarray
    val: np.ndarray
    test: np.ndarray

    def sizes(self):
        return len(self.train), len(self.val), len(self.test)


def split(count: int, seed: int) -> SplitIndices:
    """
    Shuffle ``0..count-1`` with ``seed`` and cut it 70/15/15.

    The train and validation sizes are floored; the test split takes the
    remainder.
    """
    RangeValidator.validate_integer("count", count, low=MIN_SPLIT_COUNT).raise_for_errors(
        DatasetConfigValidationError
    )

    order = np.random.default_rng(seed).permutation(count)
    n_train = count * TRAIN_PERCENT // 100
    n_val = count * VAL_PERCENT // 100

    return SplitIndices(
        train=np.sort(order[:n_train]),
        val=np.sort(order[n_train:n_train + n_val]),
        test=np.sort(order[n_train + n_val:]),
    )
