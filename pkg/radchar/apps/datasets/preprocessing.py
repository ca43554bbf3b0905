"""
IQ standardisation and regression label scaling.

Statistics are always computed from the training split and stored with the
checkpoint; evaluation and inference reuse them unchanged.
"""

from dataclasses import dataclass, field
from typing import Dict, Iterable, Tuple, Union

import numpy as np

from radchar.apps.core.exceptions import (
    DegenerateVarianceError,
    ErrorDetail,
    LabelRangeError,
    ValidationException,
)
from radchar.apps.waveforms.params import N_P_RANGE, T_D_RANGE_S, T_PRI_RANGE_S, T_PW_RANGE_S, SignalParams

MIN_VARIANCE = 1e-12

# Normalised values within this distance of [0, 1] are clipped rather than rejected.
LABEL_TOLERANCE = 1e-5

LABEL_NAMES = ("n_p", "t_pw", "t_pri", "t_d")


@dataclass(frozen=True)
class StandardizationStats:
    """Pooled mean and variance over every I and Q value of the training split."""

    mean: float
    variance: float

    @property
    def std(self) -> float:
        return float(np.sqrt(self.variance))

    def apply(self, frames: np.ndarray) -> np.ndarray:
        return ((np.asarray(frames, dtype=np.float64) - self.mean) / self.std).astype(np.float32)

    def to_dict(self) -> Dict[str, float]:
        return {"mean": self.mean, "variance": self.variance}

    @classmethod
    def from_dict(cls, data: Dict[str, float]) -> "StandardizationStats":
        return cls(mean=float(data["mean"]), variance=float(data["variance"]))


def compute_standardization(frames: Union[np.ndarray, Iterable[np.ndarray]]) -> StandardizationStats:
    """
    Pooled statistics of the training frames.

    ``frames`` is either one array or an iterable of chunks (as produced by
    ``RadCharDataset.iter_frames``). Chunk moments are merged pairwise in
    float64.

    Raises:
        DegenerateVarianceError: The pooled variance is below 1e-12.
    """
    chunks = [frames] if isinstance(frames, np.ndarray) else frames

    count = 0
    mean = 0.0
    m2 = 0.0
    for chunk in chunks:
        values = np.asarray(chunk, dtype=np.float64).ravel()
        if values.size == 0:
            continue
        chunk_mean = float(values.mean())
        chunk_m2 = float(np.sum((values - chunk_mean) ** 2))
        total = count + values.size
        delta = chunk_mean - mean
        mean += delta * values.size / total
        m2 += chunk_m2 + delta ** 2 * count * values.size / total
        count = total

    if count == 0:
        raise ValidationException("Cannot standardise an empty training split")

    variance = m2 / count
    if variance < MIN_VARIANCE:
        raise DegenerateVarianceError(
            f"Pooled variance {variance:.3e} is below {MIN_VARIANCE:g}",
            details=[ErrorDetail(message="degenerate variance", code="variance", context={"variance": variance})],
        )
    return StandardizationStats(mean=mean, variance=variance)


def _default_bounds() -> Dict[str, Tuple[float, float]]:
    return {
        "n_p": (float(N_P_RANGE[0]), float(N_P_RANGE[1])),
        "t_pw": T_PW_RANGE_S,
        "t_pri": T_PRI_RANGE_S,
        "t_d": T_D_RANGE_S,
    }


@dataclass(frozen=True)
class LabelNormalizer:
    """
    Min-max scaling of the four regression targets to ``[0, 1]``.

    Vectors are ordered ``(n_p, t_pw, t_pri, t_d)``; times are in seconds.
    """

    bounds: Dict[str, Tuple[float, float]] = field(default_factory=_default_bounds)

    def __post_init__(self):
        for name in LABEL_NAMES:
            low, high = self.bounds[name]
            if not low < high:
                raise ValidationException(
                    f"Normaliser bounds for {name} must satisfy min < max",
                    details=[ErrorDetail(message="empty range", code="bounds", field=name,
                                         context={"min": low, "max": high})],
                )

    @property
    def low(self) -> np.ndarray:
        return np.array([self.bounds[name][0] for name in LABEL_NAMES], dtype=np.float64)

    @property
    def span(self) -> np.ndarray:
        return np.array([self.bounds[name][1] - self.bounds[name][0] for name in LABEL_NAMES], dtype=np.float64)

    def normalize_array(self, values: np.ndarray) -> np.ndarray:
        """Scale an ``(..., 4)`` array of physical labels."""
        scaled = (np.asarray(values, dtype=np.float64) - self.low) / self.span
        bad = (scaled < -LABEL_TOLERANCE) | (scaled > 1.0 + LABEL_TOLERANCE)
        if np.any(bad):
            columns = sorted({LABEL_NAMES[i] for i in np.nonzero(bad)[-1]})
            raise LabelRangeError(
                f"Labels outside the normaliser bounds: {', '.join(columns)}",
                details=[ErrorDetail(message="out of range", code="label_range", field=name) for name in columns],
            )
        return np.clip(scaled, 0.0, 1.0)

    def denormalize_array(self, values: np.ndarray) -> np.ndarray:
        return np.asarray(values, dtype=np.float64) * self.span + self.low

    def normalize(self, params: SignalParams) -> np.ndarray:
        """Normalised label vector of one waveform."""
        return self.normalize_array(np.array([params.n_p, params.t_pw, params.t_pri, params.t_d], dtype=np.float64))

    def denormalize(self, vector: np.ndarray) -> Dict[str, float]:
        physical = self.denormalize_array(vector)
        return {name: float(value) for name, value in zip(LABEL_NAMES, physical)}

    def to_dict(self) -> Dict[str, list]:
        return {name: [float(low), float(high)] for name, (low, high) in self.bounds.items()}

    @classmethod
    def from_dict(cls, data: Dict[str, list]) -> "LabelNormalizer":
        return cls(bounds={name: (float(data[name][0]), float(data[name][1])) for name in LABEL_NAMES})
