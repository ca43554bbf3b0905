"""
Single-frame inference from an IQ file.

Accepted inputs:

- ``.npy`` real array of shape (2, 512), rows I and Q
- ``.npy`` complex array of shape (512,)
- ``.csv`` with ``i`` and ``q`` columns and 512 rows (``inspect --dump-csv``
  output qualifies; other columns are ignored)
"""

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Dict

import numpy as np
import pandas as pd

from radchar.apps.core.exceptions import ErrorDetail, InputFormatError
from radchar.apps.nn.tensor import Tensor, no_grad
from radchar.apps.waveforms.params import SAMPLES_PER_FRAME, SignalClass

from .evaluation import TrainedModel

logger = logging.getLogger(__name__)


def _malformed(path: Path, reason: str) -> InputFormatError:
    return InputFormatError(
        f"{path} is not a usable IQ frame: {reason}",
        details=[ErrorDetail(message=reason, code="input_format", field="input")],
    )


def read_iq_file(path: Path) -> np.ndarray:
    """
    Load one frame as a float32 (2, 512) array.

    Raises:
        InputFormatError: Unknown extension, wrong shape or non-finite values.
    """
    path = Path(path)
    suffix = path.suffix.lower()
    if suffix == ".npy":
        try:
            array = np.load(path, allow_pickle=False)
        except ValueError as exc:
            raise _malformed(path, str(exc)) from exc
        if np.iscomplexobj(array):
            if array.shape != (SAMPLES_PER_FRAME,):
                raise _malformed(path, f"complex input must have shape ({SAMPLES_PER_FRAME},), got {array.shape}")
            frame = np.stack([array.real, array.imag])
        else:
            if array.shape != (2, SAMPLES_PER_FRAME):
                raise _malformed(path, f"real input must have shape (2, {SAMPLES_PER_FRAME}), got {array.shape}")
            frame = array
    elif suffix == ".csv":
        try:
            table = pd.read_csv(path)
        except (pd.errors.ParserError, pd.errors.EmptyDataError, UnicodeDecodeError) as exc:
            raise _malformed(path, str(exc)) from exc
        if not {"i", "q"} <= set(table.columns):
            raise _malformed(path, "CSV input needs i and q columns")
        if len(table) != SAMPLES_PER_FRAME:
            raise _malformed(path, f"CSV input needs {SAMPLES_PER_FRAME} rows, got {len(table)}")
        try:
            frame = table[["i", "q"]].to_numpy(dtype=np.float64).T
        except ValueError as exc:
            raise _malformed(path, "i and q must be numeric") from exc
    else:
        raise _malformed(path, f"unsupported extension {suffix or '(none)'}; use .npy or .csv")

    try:
        frame = np.asarray(frame, dtype=np.float32)
    except (TypeError, ValueError) as exc:
        raise _malformed(path, "values must be numeric") from exc
    if not np.all(np.isfinite(frame)):
        raise _malformed(path, "values must be finite")
    return frame


@dataclass(frozen=True)
class InferenceResult:
    signal_class: SignalClass
    probability: float
    probabilities: Dict[str, float]
    n_p_raw: float
    t_pw_s: float
    t_pri_s: float
    t_d_s: float

    @property
    def n_p(self) -> int:
        return int(np.rint(self.n_p_raw))


def infer(trained: TrainedModel, frame: np.ndarray) -> InferenceResult:
    """Classify and characterise one (2, 512) frame in physical units."""
    batch = trained.stats.apply(np.asarray(frame)[None, ...])
    trained.model.eval()
    with no_grad():
        outputs = trained.model(Tensor(batch))
    probabilities = outputs.class_probabilities()[0]
    predicted = SignalClass(int(np.argmax(probabilities)))
    physical = trained.normalizer.denormalize(outputs.reg.data[0])
    logger.debug("Inferred %s with p=%.3f", predicted.label, probabilities[predicted])
    return InferenceResult(
        signal_class=predicted,
        probability=float(probabilities[predicted]),
        probabilities={c.label: float(probabilities[c]) for c in SignalClass},
        n_p_raw=physical["n_p"],
        t_pw_s=physical["t_pw"],
        t_pri_s=physical["t_pri"],
        t_d_s=physical["t_d"],
    )
