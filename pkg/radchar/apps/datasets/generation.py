"""
Deterministic, optionally parallel dataset generation.

Records are produced in fixed-size index blocks. Each block depends only on
the config and its index range, so the worker count never changes the
bytes that reach the file.
"""

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import List, Tuple

import numpy as np
from joblib import Parallel, delayed
from tqdm import tqdm

from radchar.apps.core.exceptions import DatasetConfigValidationError
from radchar.apps.core.validators import DatasetValidator
from radchar.apps.waveforms.params import SignalClass

from .config import DatasetConfig
from .sampling import generate_record
from .storage import DatasetWriter, records_to_array, write_sidecar

logger = logging.getLogger(__name__)

CHUNK_SIZE = 1024


@dataclass
class GenerationSummary:
    path: Path
    sidecar: Path
    count: int
    file_size: int
    fingerprint: str
    class_histogram: np.ndarray
    snr_span: Tuple[float, float]


def generate_block(config: DatasetConfig, start: int, stop: int) -> np.ndarray:
    """Records ``start`` up to ``stop`` (exclusive) in the on-disk layout."""
    return records_to_array([generate_record(config, index) for index in range(start, stop)])


def block_ranges(count: int, chunk_size: int = CHUNK_SIZE) -> List[Tuple[int, int]]:
    return [(start, min(start + chunk_size, count)) for start in range(0, count, chunk_size)]


def generate(
    config: DatasetConfig,
    path: Path,
    workers: int = 1,
    chunk_size: int = CHUNK_SIZE,
    progress: bool = False,
) -> GenerationSummary:
    """
    Generate ``config.count`` records into ``path`` and write the sidecar.

    Args:
        config: Validated before any work is done.
        path: Destination file; its parent directory is created.
        workers: Number of joblib workers. The output does not depend on it.
        chunk_size: Records per block handed to a worker.
        progress: Show a tqdm bar over blocks.

    Returns:
        GenerationSummary with the class histogram and SNR span.
    """
    config.validate()
    DatasetValidator.validate_workers(workers).raise_for_errors(DatasetConfigValidationError)

    path = Path(path)
    ranges = block_ranges(config.count, chunk_size)
    histogram = np.zeros(len(SignalClass), dtype=np.int64)
    snr_low, snr_high = np.inf, -np.inf

    logger.info("Generating %d records (seed %d, %d worker(s)) into %s", config.count, config.seed, workers, path)

    blocks = Parallel(n_jobs=workers, return_as="generator")(
        delayed(generate_block)(config, start, stop) for start, stop in ranges
    )

    with DatasetWriter(path, config.count, config.f_s) as writer:
        for block in tqdm(blocks, total=len(ranges), desc="generate", unit="block", disable=not progress):
            writer.write(block)
            histogram += np.bincount(block["class"], minlength=len(SignalClass))
            snr_low = min(snr_low, float(block["snr_db"].min()))
            snr_high = max(snr_high, float(block["snr_db"].max()))

    sidecar = write_sidecar(path, config, {"class_histogram": histogram.tolist()})
    summary = GenerationSummary(
        path=path,
        sidecar=sidecar,
        count=config.count,
        file_size=path.stat().st_size,
        fingerprint=config.fingerprint(),
        class_histogram=histogram,
        snr_span=(snr_low, snr_high),
    )
    logger.info("Wrote %s (%d bytes, fingerprint %s)", path, summary.file_size, summary.fingerprint[:12])
    return summary
