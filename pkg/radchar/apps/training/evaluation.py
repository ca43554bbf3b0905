"""
Per-SNR evaluation of a trained model.

Predictions are mapped back to physical units before any error is
measured: MAE(n_p) is in pulses, the time MAEs are in microseconds.
"""

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, Optional

import numpy as np
import pandas as pd
from scipy import stats as scipy_stats

from radchar.apps.core.exceptions import CheckpointFormatError, ErrorDetail, StatsMismatchError
from radchar.apps.datasets.preprocessing import LabelNormalizer, StandardizationStats
from radchar.apps.datasets.splits import split
from radchar.apps.datasets.storage import LabelArrays, RadCharDataset
from radchar.apps.networks.config import NUM_CLASSES, ModelConfig
from radchar.apps.networks.model import MTLModel
from radchar.apps.nn.checkpoint import load_checkpoint
from radchar.apps.nn.tensor import Tensor, no_grad
from radchar.apps.waveforms.params import SNR_RANGE_DB

logger = logging.getLogger(__name__)

SNR_BINS = np.arange(SNR_RANGE_DB[0], SNR_RANGE_DB[1] + 1)

# Physical label units to report units: pulses stay pulses, seconds become us.
REPORT_SCALE = np.array([1.0, 1e6, 1e6, 1e6])
MAE_COLUMNS = ("mae_np", "mae_tpw_us", "mae_tpri_us", "mae_td_us")

EVAL_BATCH_SIZE = 256

REQUIRED_META = ("model", "stats", "normalizer", "dataset_fingerprint", "split_seed")


@dataclass(frozen=True, eq=False)
class Predictions:
    """Model outputs for a set of records; ``regression`` is in physical units."""

    indices: np.ndarray
    classes: np.ndarray
    probabilities: np.ndarray
    regression: np.ndarray


@dataclass(frozen=True, eq=False)
class EvalReport:
    """
    Accuracy and MAEs per integer SNR bin from -20 to 20 dB.

    Bins without records hold NaN.
    """

    snr_db: np.ndarray  # (41,)
    counts: np.ndarray  # (41,)
    accuracy: np.ndarray  # (41,)
    mae: np.ndarray  # (41, 4), MAE_COLUMNS order
    overall_accuracy: float
    overall_mae: np.ndarray  # (4,)
    confusion: np.ndarray  # (5, 5), rows true class, columns predicted
    spearman: float

    def bin(self, snr_db: int) -> Dict[str, float]:
        row = int(np.searchsorted(self.snr_db, snr_db))
        if row >= len(self.snr_db) or self.snr_db[row] != snr_db:
            raise KeyError(snr_db)
        return {
            "count": int(self.counts[row]),
            "accuracy": float(self.accuracy[row]),
            **{name: float(value) for name, value in zip(MAE_COLUMNS, self.mae[row])},
        }

    def to_frame(self) -> pd.DataFrame:
        frame = pd.DataFrame({"snr_db": self.snr_db, "accuracy": self.accuracy})
        for column, name in enumerate(MAE_COLUMNS):
            frame[name] = self.mae[:, column]
        return frame


def summarize(labels: LabelArrays, classes: np.ndarray, regression: np.ndarray) -> EvalReport:
    """
    Build a report from ground truth and predictions in physical units.

    Works for any predictor, including one that echoes the labels back.
    """
    errors = np.abs(np.asarray(regression, dtype=np.float64) - labels.regression) * REPORT_SCALE
    correct = np.asarray(classes) == labels.classes

    records = pd.DataFrame({"snr_db": np.rint(labels.snr_db).astype(int), "correct": correct.astype(float)})
    for column, name in enumerate(MAE_COLUMNS):
        records[name] = errors[:, column]
    grouped = records.groupby("snr_db").agg(
        count=("correct", "size"),
        accuracy=("correct", "mean"),
        **{name: (name, "mean") for name in MAE_COLUMNS},
    ).reindex(SNR_BINS)

    confusion = np.zeros((NUM_CLASSES, NUM_CLASSES), dtype=np.int64)
    np.add.at(confusion, (labels.classes, np.asarray(classes)), 1)

    accuracy = grouped["accuracy"].to_numpy(dtype=np.float64)
    return EvalReport(
        snr_db=SNR_BINS.copy(),
        counts=grouped["count"].fillna(0).to_numpy(dtype=np.int64),
        accuracy=accuracy,
        mae=grouped[list(MAE_COLUMNS)].to_numpy(dtype=np.float64),
        overall_accuracy=float(correct.mean()) if len(correct) else float("nan"),
        overall_mae=errors.mean(axis=0) if len(errors) else np.full(len(MAE_COLUMNS), np.nan),
        confusion=confusion,
        spearman=snr_accuracy_correlation(SNR_BINS, accuracy),
    )


def snr_accuracy_correlation(snr_db: np.ndarray, accuracy: np.ndarray) -> float:
    """Spearman rank correlation over the non-empty bins; NaN when undefined."""
    present = ~np.isnan(accuracy)
    if present.sum() < 2 or np.ptp(accuracy[present]) == 0:
        return float("nan")
    return float(scipy_stats.spearmanr(snr_db[present], accuracy[present]).statistic)


def predict(
    model: MTLModel,
    dataset: RadCharDataset,
    indices: np.ndarray,
    stats: StandardizationStats,
    normalizer: LabelNormalizer,
    batch_size: int = EVAL_BATCH_SIZE,
) -> Predictions:
    model.eval()
    indices = np.asarray(indices)
    classes, probabilities, regression = [], [], []
    with no_grad():
        for start in range(0, len(indices), batch_size):
            chunk = indices[start:start + batch_size]
            outputs = model(Tensor(stats.apply(dataset.frames(chunk))))
            classes.append(outputs.predicted_classes())
            probabilities.append(outputs.class_probabilities())
            regression.append(normalizer.denormalize_array(outputs.reg.data))
    return Predictions(
        indices=indices,
        classes=np.concatenate(classes),
        probabilities=np.concatenate(probabilities),
        regression=np.concatenate(regression),
    )


def evaluate(
    model: MTLModel,
    dataset: RadCharDataset,
    indices: np.ndarray,
    stats: StandardizationStats,
    normalizer: LabelNormalizer,
) -> EvalReport:
    logger.info("Evaluating %d records", len(indices))
    predictions = predict(model, dataset, indices, stats, normalizer)
    report = summarize(dataset.labels(indices), predictions.classes, predictions.regression)
    logger.info("Overall accuracy %.4f", report.overall_accuracy)
    return report


@dataclass
class TrainedModel:
    """A model restored from a checkpoint together with its preprocessing."""

    model: MTLModel
    stats: StandardizationStats
    normalizer: LabelNormalizer
    meta: Dict[str, Any]
    path: Optional[Path] = None

    @property
    def dataset_fingerprint(self) -> str:
        return self.meta["dataset_fingerprint"]

    def check_dataset(self, dataset: RadCharDataset) -> None:
        """
        Raises:
            StatsMismatchError: ``dataset`` is not the one the model was trained on.
        """
        if dataset.fingerprint != self.dataset_fingerprint:
            raise StatsMismatchError(
                f"{dataset.path} was not used to train {self.path}",
                details=[ErrorDetail(message="dataset fingerprint differs", code="fingerprint",
                                     context={"checkpoint": self.dataset_fingerprint[:12],
                                              "dataset": dataset.fingerprint[:12]})],
            )

    def split_indices(self, dataset: RadCharDataset, name: str) -> np.ndarray:
        if name == "all":
            return np.arange(len(dataset))
        return getattr(split(len(dataset), int(self.meta["split_seed"])), name)


def load_trained(path: Path) -> TrainedModel:
    """
    Rebuild the model a checkpoint describes and load its weights.

    Raises:
        CheckpointFormatError: The metadata lacks the model config, the
            statistics or the dataset fingerprint.
    """
    checkpoint = load_checkpoint(path)
    missing = [key for key in REQUIRED_META if key not in checkpoint.meta]
    if missing:
        raise CheckpointFormatError(f"{path} metadata lacks {', '.join(missing)}")

    model = MTLModel(ModelConfig.from_dict(checkpoint.meta["model"]))
    checkpoint.restore(model)
    model.eval()
    return TrainedModel(
        model=model,
        stats=StandardizationStats.from_dict(checkpoint.meta["stats"]),
        normalizer=LabelNormalizer.from_dict(checkpoint.meta["normalizer"]),
        meta=checkpoint.meta,
        path=Path(path),
    )
