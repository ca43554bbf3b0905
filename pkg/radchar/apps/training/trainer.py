"""
Training loop with best-validation model selection.

``fit`` writes three files next to ``out``:

- ``out``: checkpoint with the lowest validation loss
- ``<stem>-last<suffix>``: checkpoint after the final epoch
- ``<stem>-log.jsonl``: one JSON object per epoch
"""

import json
import logging
import math
import time
from contextlib import closing
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional

import numpy as np
from tqdm import tqdm

import radchar
from radchar.apps.core.concurrency import prefetch
from radchar.apps.core.exceptions import (
    ConfigurationException,
    ErrorDetail,
    NonFiniteTensorError,
    TrainingDivergedError,
)
from radchar.apps.datasets.preprocessing import LabelNormalizer, StandardizationStats, compute_standardization
from radchar.apps.datasets.splits import split
from radchar.apps.datasets.storage import RadCharDataset
from radchar.apps.networks.model import MTLModel
from radchar.apps.nn.checkpoint import save_checkpoint
from radchar.apps.nn.optim import Adam
from radchar.apps.nn.tensor import Tensor, no_grad

from .config import WEIGHT_NAMES, TrainConfig
from .data import iter_batches
from .losses import mtl_loss_breakdown

logger = logging.getLogger(__name__)


@dataclass
class EpochLog:
    epoch: int
    train_loss: float
    val_loss: float
    train_tasks: Dict[str, float]
    val_tasks: Dict[str, float]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "epoch": self.epoch,
            "train_loss": self.train_loss,
            "val_loss": self.val_loss,
            "train_tasks": self.train_tasks,
            "val_tasks": self.val_tasks,
        }


@dataclass
class TrainResult:
    best_path: Path
    last_path: Path
    log_path: Path
    best_epoch: int
    best_val_loss: float
    stats: StandardizationStats
    normalizer: LabelNormalizer
    history: List[EpochLog] = field(default_factory=list)


def output_paths(out: Path):
    out = Path(out)
    return out, out.with_name(f"{out.stem}-last{out.suffix}"), out.with_name(f"{out.stem}-log.jsonl")


def checkpoint_meta(
    model: MTLModel,
    config: TrainConfig,
    dataset: RadCharDataset,
    stats: StandardizationStats,
    normalizer: LabelNormalizer,
    epoch: int,
    val_loss: float,
) -> Dict[str, Any]:
    return {
        "model": model.config.to_dict(),
        "train": config.to_dict(),
        "train_config_hash": config.config_hash(),
        "stats": stats.to_dict(),
        "normalizer": normalizer.to_dict(),
        "dataset_fingerprint": dataset.fingerprint,
        "split_seed": dataset.config.seed,
        "epoch": epoch,
        "val_loss": val_loss,
        "generator_version": radchar.__version__,
    }


class _Accumulator:
    """Batch-size weighted running means of the loss terms."""

    def __init__(self):
        self.count = 0
        self.sums = {name: 0.0 for name in ("total",) + WEIGHT_NAMES}

    def add(self, values: Dict[str, float], size: int) -> None:
        self.count += size
        for name, value in values.items():
            self.sums[name] += value * size

    def means(self) -> Dict[str, float]:
        return {name: total / max(self.count, 1) for name, total in self.sums.items()}


def _diverged(epoch: int, batch: int, tasks: Optional[Dict[str, float]], cause: str) -> TrainingDivergedError:
    context = {"epoch": epoch, "batch": batch}
    if tasks:
        context["tasks"] = tasks
    return TrainingDivergedError(
        f"Loss became non-finite at epoch {epoch}, batch {batch}",
        details=[ErrorDetail(message=cause, code="non_finite_loss", context=context)],
    )


def validation_loss(model, dataset, indices, config, stats, normalizer) -> Dict[str, float]:
    model.eval()
    totals = _Accumulator()
    with no_grad():
        for batch in iter_batches(dataset, indices, config.batch_size, stats, normalizer):
            breakdown = mtl_loss_breakdown(model(Tensor(batch.frames)), batch.targets, config.weights)
            totals.add(breakdown.as_dict(), len(batch))
    return totals.means()


def fit(
    model: MTLModel,
    dataset: RadCharDataset,
    config: TrainConfig,
    out: Path,
    progress: bool = False,
) -> TrainResult:
    """
    Train ``model`` on the training split of ``dataset``.

    Standardisation statistics come from the (possibly subset) training
    split only. Batches are shuffled by ``config.seed`` and prefetched on a
    background thread.

    Raises:
        TrainingDivergedError: A loss term became NaN or Inf.
    """
    config.validate()
    if model.config != config.model:
        raise ConfigurationException("Model architecture differs from the training configuration")

    best_path, last_path, log_path = output_paths(out)
    best_path.parent.mkdir(parents=True, exist_ok=True)

    parts = split(len(dataset), dataset.config.seed)
    train_indices = parts.train[:config.subset] if config.subset else parts.train
    stats = compute_standardization(dataset.iter_frames(train_indices))
    normalizer = LabelNormalizer()
    optimizer = Adam(model.named_parameters(), lr=config.lr)
    shuffle_rng = config.shuffle_rng()

    logger.info(
        "Training %s on %d records (%d validation) for %d epochs, lr %g, batch %d",
        model.config.backbone.value, len(train_indices), len(parts.val), config.epochs, config.lr, config.batch_size,
    )

    history: List[EpochLog] = []
    best_epoch, best_val = 0, math.inf
    with open(log_path, "w", encoding="utf-8") as log_file:
        for epoch in range(1, config.epochs + 1):
            started = time.monotonic()
            model.train()
            running = _Accumulator()
            batches = closing(prefetch(
                iter_batches(dataset, train_indices, config.batch_size, stats, normalizer, rng=shuffle_rng)
            ))
            n_batches = math.ceil(len(train_indices) / config.batch_size)
            with batches as stream:
                for number, batch in enumerate(
                    tqdm(stream, total=n_batches, desc=f"epoch {epoch}", unit="batch", disable=not progress), 1
                ):
                    optimizer.zero_grad()
                    try:
                        breakdown = mtl_loss_breakdown(model(Tensor(batch.frames)), batch.targets, config.weights)
                    except NonFiniteTensorError as exc:
                        raise _diverged(epoch, number, None, exc.message) from exc
                    values = breakdown.as_dict()
                    if not all(math.isfinite(v) for v in values.values()):
                        raise _diverged(epoch, number, values, "non-finite loss term")
                    try:
                        breakdown.total.backward()
                    except NonFiniteTensorError as exc:
                        raise _diverged(epoch, number, values, exc.message) from exc
                    optimizer.step()
                    running.add(values, len(batch))

            train_means = running.means()
            val_means = validation_loss(model, dataset, parts.val, config, stats, normalizer)
            entry = EpochLog(
                epoch=epoch,
                train_loss=train_means.pop("total"),
                val_loss=val_means.pop("total"),
                train_tasks=train_means,
                val_tasks=val_means,
            )
            history.append(entry)
            log_file.write(json.dumps(entry.to_dict(), sort_keys=True) + "\n")
            log_file.flush()

            if entry.val_loss < best_val:
                best_epoch, best_val = epoch, entry.val_loss
                save_checkpoint(
                    best_path, model, optimizer,
                    checkpoint_meta(model, config, dataset, stats, normalizer, epoch, entry.val_loss),
                )
            logger.info(
                "Epoch %d/%d: train %.5f, val %.5f%s (%.1fs)",
                epoch, config.epochs, entry.train_loss, entry.val_loss,
                " *" if best_epoch == epoch else "", time.monotonic() - started,
            )

    save_checkpoint(
        last_path, model, optimizer,
        checkpoint_meta(model, config, dataset, stats, normalizer, config.epochs, history[-1].val_loss),
    )
    logger.info("Best validation loss %.5f at epoch %d, saved to %s", best_val, best_epoch, best_path)
    return TrainResult(
        best_path=best_path,
        last_path=last_path,
        log_path=log_path,
        best_epoch=best_epoch,
        best_val_loss=best_val,
        stats=stats,
        normalizer=normalizer,
        history=history,
    )
