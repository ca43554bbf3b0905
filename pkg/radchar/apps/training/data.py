"""
Mini-batches of standardised frames with normalised targets.
"""

from dataclasses import dataclass
from typing import Iterator, Optional

import numpy as np

from radchar.apps.datasets.preprocessing import LabelNormalizer, StandardizationStats
from radchar.apps.datasets.storage import RadCharDataset

from .losses import Targets


@dataclass(frozen=True, eq=False)
class Batch:
    indices: np.ndarray
    frames: np.ndarray  # (B, 2, 512) float32, standardised
    targets: Targets
    snr_db: np.ndarray

    def __len__(self) -> int:
        return len(self.indices)


def iter_batches(
    dataset: RadCharDataset,
    indices: np.ndarray,
    batch_size: int,
    stats: StandardizationStats,
    normalizer: LabelNormalizer,
    rng: Optional[np.random.Generator] = None,
) -> Iterator[Batch]:
    """
    Yield batches over ``indices``; with ``rng`` the order is shuffled first.
    The last batch may be short.
    """
    indices = np.asarray(indices)
    if rng is not None:
        indices = indices[rng.permutation(len(indices))]
    for start in range(0, len(indices), batch_size):
        chunk = indices[start:start + batch_size]
        labels = dataset.labels(chunk)
        yield Batch(
            indices=chunk,
            frames=stats.apply(dataset.frames(chunk)),
            targets=Targets(classes=labels.classes, reg=normalizer.normalize_array(labels.regression)),
            snr_db=labels.snr_db,
        )
