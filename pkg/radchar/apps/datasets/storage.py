"""
Little-endian binary dataset file and its JSON sidecar.

Layout::

    header   magic "RADC" | version u32 | count u64 | samples u32 | f_s f64
    records  index u64 | class u8 | l_c u8 | n_p u8 | pad u8 |
             snr_db f32 | t_pw f32 | t_pri f32 | t_d f32 |
             samples x (i f32, q f32)

The sidecar ``<file>.json`` holds the generating config, so any record
can be regenerated from it.
"""

import json
import logging
import os
import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, Iterator, Optional, Sequence, Tuple

import numpy as np

import radchar
from radchar.apps.core.exceptions import (
    DatasetFormatError,
    DatasetIOError,
    ErrorDetail,
    RecordIndexError,
)
from radchar.apps.waveforms.params import SAMPLES_PER_FRAME, IQFrame, SignalClass, SignalParams

from .config import FORMAT_VERSION, DatasetConfig
from .sampling import DatasetRecord

logger = logging.getLogger(__name__)

MAGIC = b"RADC"
HEADER = struct.Struct("<4sIQId")

RECORD_DTYPE = np.dtype(
    [
        ("index", "<u8"),
        ("class", "u1"),
        ("l_c", "u1"),
        ("n_p", "u1"),
        ("pad", "u1"),
        ("snr_db", "<f4"),
        ("t_pw_s", "<f4"),
        ("t_pri_s", "<f4"),
        ("t_d_s", "<f4"),
        ("iq", "<f4", (SAMPLES_PER_FRAME, 2)),
    ]
)

# Regression label order used throughout training and evaluation.
LABEL_FIELDS = ("n_p", "t_pw_s", "t_pri_s", "t_d_s")


def sidecar_path(path: Path) -> Path:
    path = Path(path)
    return path.with_name(path.name + ".json")


def expected_file_size(count: int) -> int:
    return HEADER.size + count * RECORD_DTYPE.itemsize


def records_to_array(records: Sequence[DatasetRecord]) -> np.ndarray:
    """Pack records into the on-disk structured layout."""
    array = np.zeros(len(records), dtype=RECORD_DTYPE)
    array["index"] = [record.index for record in records]
    array["class"] = [int(record.params.signal_class) for record in records]
    array["l_c"] = [record.params.l_c for record in records]
    array["n_p"] = [record.params.n_p for record in records]
    array["snr_db"] = [record.params.snr_db for record in records]
    array["t_pw_s"] = [record.params.t_pw for record in records]
    array["t_pri_s"] = [record.params.t_pri for record in records]
    array["t_d_s"] = [record.params.t_d for record in records]
    for row, record in enumerate(records):
        array["iq"][row, :, 0] = record.frame.i
        array["iq"][row, :, 1] = record.frame.q
    return array


def row_to_params(row: np.void) -> SignalParams:
    return SignalParams(
        signal_class=SignalClass(int(row["class"])),
        t_pw=float(row["t_pw_s"]),
        t_pri=float(row["t_pri_s"]),
        n_p=int(row["n_p"]),
        t_d=float(row["t_d_s"]),
        l_c=int(row["l_c"]),
        snr_db=float(row["snr_db"]),
    )


class DatasetWriter:
    """
    Streams record blocks to ``path``.

    The file is written under a temporary name and moved into place on a
    clean exit, so a failed run never leaves a truncated dataset behind.
    """

    def __init__(self, path: Path, count: int, f_s: float):
        self.path = Path(path)
        self.count = count
        self.f_s = f_s
        self.written = 0
        self._tmp_path = self.path.with_name(self.path.name + ".partial")
        self._handle = None

    def __enter__(self) -> "DatasetWriter":
        try:
            self.path.parent.mkdir(parents=True, exist_ok=True)
            self._handle = open(self._tmp_path, "wb")
            self._handle.write(HEADER.pack(MAGIC, FORMAT_VERSION, self.count, SAMPLES_PER_FRAME, self.f_s))
        except OSError as exc:
            raise DatasetIOError(f"Cannot write dataset {self.path}: {exc}") from exc
        return self

    def write(self, block: np.ndarray) -> None:
        if block.dtype != RECORD_DTYPE:
            raise DatasetFormatError("Record block has the wrong dtype")
        expected = np.arange(self.written, self.written + len(block))
        if not np.array_equal(block["index"], expected):
            raise DatasetFormatError("Records must be written in index order")
        try:
            self._handle.write(block.tobytes())
        except OSError as exc:
            raise DatasetIOError(f"Cannot write dataset {self.path}: {exc}") from exc
        self.written += len(block)

    def __exit__(self, exc_type, exc, tb) -> None:
        self._handle.close()
        if exc_type is not None:
            self._tmp_path.unlink(missing_ok=True)
            return
        if self.written != self.count:
            self._tmp_path.unlink(missing_ok=True)
            raise DatasetFormatError(f"Wrote {self.written} records, header declares {self.count}")
        os.replace(self._tmp_path, self.path)


def write_sidecar(path: Path, config: DatasetConfig, extra: Optional[Dict[str, Any]] = None) -> Path:
    """Write the metadata sidecar; content depends only on its inputs."""
    metadata = {
        "format_version": FORMAT_VERSION,
        "generator_version": radchar.__version__,
        "seed": config.seed,
        "config": config.to_dict(),
        "fingerprint": config.fingerprint(),
    }
    metadata.update(extra or {})
    target = sidecar_path(path)
    try:
        target.write_text(json.dumps(metadata, sort_keys=True, indent=2) + "\n", encoding="utf-8")
    except OSError as exc:
        raise DatasetIOError(f"Cannot write sidecar {target}: {exc}") from exc
    return target


@dataclass(frozen=True)
class LabelArrays:
    """Ground truth of a set of records in physical units."""

    classes: np.ndarray  # (n,) int64
    regression: np.ndarray  # (n, 4) float64, order n_p, t_pw, t_pri, t_d
    snr_db: np.ndarray  # (n,) float64


class RadCharDataset:
    """
    Read-only, memory-mapped view of a dataset file.

    Example:
        dataset = RadCharDataset("radchar.radc")
        frames = dataset.frames([0, 1, 2])  # (3, 2, 512) float32
    """

    def __init__(self, path):
        self.path = Path(path)
        try:
            with open(self.path, "rb") as handle:
                header = handle.read(HEADER.size)
            size = self.path.stat().st_size
        except OSError as exc:
            raise DatasetIOError(f"Cannot read dataset {self.path}: {exc}") from exc

        if len(header) < HEADER.size:
            raise DatasetFormatError(f"{self.path} is too short to hold a header")
        magic, version, count, samples, f_s = HEADER.unpack(header)
        if magic != MAGIC:
            raise DatasetFormatError(f"{self.path} is not a RadChar dataset (magic {magic!r})")
        if version != FORMAT_VERSION:
            raise DatasetFormatError(f"Unsupported format version {version}")
        if samples != SAMPLES_PER_FRAME:
            raise DatasetFormatError(f"Unsupported frame length {samples}")
        if count == 0:
            raise DatasetFormatError(f"{self.path} declares no records")
        if size != expected_file_size(count):
            raise DatasetFormatError(
                f"{self.path} has {size} bytes, header implies {expected_file_size(count)}",
                details=[ErrorDetail(message="size mismatch", code="truncated", context={"count": count})],
            )

        self.count = int(count)
        self.f_s = float(f_s)
        self.version = int(version)
        self._records = np.memmap(self.path, dtype=RECORD_DTYPE, mode="r", offset=HEADER.size, shape=(self.count,))
        self.metadata = self._read_sidecar()

    def _read_sidecar(self) -> Optional[Dict[str, Any]]:
        path = sidecar_path(self.path)
        if not path.exists():
            logger.debug("No sidecar next to %s", self.path)
            return None
        try:
            metadata = json.loads(path.read_text(encoding="utf-8"))
        except OSError as exc:
            raise DatasetIOError(f"Cannot read sidecar {path}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise DatasetFormatError(f"Sidecar {path} is not valid JSON: {exc}") from exc
        if metadata.get("config", {}).get("count") != self.count:
            raise DatasetFormatError(f"Sidecar {path} does not describe {self.path}")
        return metadata

    def __len__(self) -> int:
        return self.count

    @property
    def config(self) -> DatasetConfig:
        if self.metadata is None:
            raise DatasetFormatError(f"Missing sidecar {sidecar_path(self.path)}")
        return DatasetConfig.from_dict(self.metadata["config"])

    @property
    def fingerprint(self) -> str:
        return self.config.fingerprint()

    def _check_index(self, index: int) -> int:
        if not 0 <= index < self.count:
            raise RecordIndexError(
                f"Record {index} is outside 0..{self.count - 1}",
                details=[ErrorDetail(message="index out of range", code="out_of_range", field="index",
                                     context={"count": self.count, "index": index})],
            )
        return int(index)

    def record(self, index: int) -> DatasetRecord:
        row = self._records[self._check_index(index)]
        iq = np.asarray(row["iq"], dtype=np.float32)
        frame = IQFrame(i=iq[:, 0].copy(), q=iq[:, 1].copy(), f_s=self.f_s)
        return DatasetRecord(index=int(row["index"]), params=row_to_params(row), frame=frame)

    def params(self, index: int) -> SignalParams:
        return row_to_params(self._records[self._check_index(index)])

    def frames(self, indices) -> np.ndarray:
        """Frames in the model layout ``(n, 2, samples)``."""
        iq = self._records["iq"][np.asarray(indices)]
        return np.ascontiguousarray(np.transpose(iq, (0, 2, 1)), dtype=np.float32)

    def labels(self, indices) -> LabelArrays:
        rows = self._records[np.asarray(indices)]
        regression = np.stack([rows[name].astype(np.float64) for name in LABEL_FIELDS], axis=1)
        return LabelArrays(
            classes=rows["class"].astype(np.int64),
            regression=regression,
            snr_db=rows["snr_db"].astype(np.float64),
        )

    def iter_frames(self, indices, chunk_size: int = 4096) -> Iterator[np.ndarray]:
        indices = np.asarray(indices)
        for start in range(0, len(indices), chunk_size):
            yield self.frames(indices[start:start + chunk_size])

    def class_histogram(self) -> np.ndarray:
        return np.bincount(self._records["class"], minlength=len(SignalClass))

    def snr_span(self) -> Tuple[float, float]:
        snr = self._records["snr_db"]
        return float(snr.min()), float(snr.max())

