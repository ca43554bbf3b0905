"""
Custom exceptions for the RadChar toolkit.
Provides domain-specific exceptions with consistent error handling patterns.
"""

from dataclasses import dataclass
from enum import IntEnum
from typing import Any, Dict, List, Optional


class ExitCode(IntEnum):
    """Process exit codes reported by the management commands."""

    OK = 0
    INTERNAL = 1
    USAGE = 2
    IO = 3
    FORMAT = 4
    NUMERICAL = 5
    MISMATCH = 6


@dataclass
class ErrorDetail:
    """Structured error detail with context information."""
    message: str
    code: str
    field: Optional[str] = None
    context: Optional[Dict[str, Any]] = None

    def to_dict(self) -> Dict[str, Any]:
        """Convert to dictionary representation."""
        data = {
            "message": self.message,
            "code": self.code,
        }
        if self.field:
            data["field"] = self.field
        if self.context:
            data["context"] = self.context
        return data


class RadCharException(Exception):
    """Base exception for all application exceptions."""

    exit_code = ExitCode.INTERNAL
    error_code = "internal_error"
    message = "An unexpected error occurred"
    details: List[ErrorDetail] = []

    def __init__(
        self,
        message: str = None,
        code: str = None,
        details: List[ErrorDetail] = None,
    ):
        self.message = message or self.message
        self.error_code = code or self.error_code
        self.details = details or []
        super().__init__(self.message)

    def to_dict(self) -> Dict[str, Any]:
        """Convert exception to a serialisable dictionary."""
        return {
            "code": self.error_code,
            "message": self.message,
            "exit_code": int(self.exit_code),
            "details": [d.to_dict() for d in self.details],
        }

    def describe(self) -> str:
        """One-line summary including field-level details."""
        parts = [f"[{self.error_code}] {self.message}"]
        for detail in self.details:
            prefix = f"{detail.field}: " if detail.field else ""
            parts.append(f"{prefix}{detail.message}")
        return "; ".join(parts)


class ValidationException(RadCharException):
    """Raised when validation fails."""

    exit_code = ExitCode.USAGE
    error_code = "validation_error"
    message = "Validation failed"


class ConfigurationException(ValidationException):
    """Raised when a command or config file is inconsistent."""

    error_code = "configuration_error"
    message = "Invalid configuration"


# Waveform synthesis

class WaveformException(RadCharException):
    """Base exception for waveform synthesis."""

    error_code = "waveform_error"
    message = "Waveform synthesis failed"


class InvalidCodeLength(WaveformException, ValidationException):
    """Raised when no phase code of the requested length exists."""

    error_code = "invalid_code_length"
    message = "Invalid code length"


class SignalParamsValidationError(WaveformException, ValidationException):
    """Raised when signal parameters violate their bounds."""

    error_code = "signal_params_invalid"
    message = "Signal parameters are out of bounds"


class FrameOverflowError(WaveformException, ValidationException):
    """Raised when the last pulse would run past the end of the frame."""

    error_code = "frame_overflow"
    message = "Pulse train does not fit inside the frame"


# Dataset

class DatasetException(RadCharException):
    """Base exception for dataset operations."""

    error_code = "dataset_error"
    message = "Dataset operation failed"


class DatasetConfigValidationError(DatasetException, ValidationException):
    """Raised when a dataset configuration is invalid."""

    error_code = "dataset_config_invalid"
    message = "Dataset configuration is invalid"


class RecordIndexError(DatasetException, ValidationException):
    """Raised when a record index is outside the dataset."""

    error_code = "record_index_out_of_range"
    message = "Record index out of range"


class DatasetIOError(DatasetException):
    """Raised when a dataset file cannot be read or written."""

    exit_code = ExitCode.IO
    error_code = "dataset_io_error"
    message = "Dataset file could not be accessed"


class DatasetFormatError(DatasetException):
    """Raised when a dataset file is malformed."""

    exit_code = ExitCode.FORMAT
    error_code = "dataset_format_error"
    message = "Dataset file is malformed"


class DegenerateVarianceError(DatasetException):
    """Raised when standardisation statistics have (near) zero variance."""

    exit_code = ExitCode.NUMERICAL
    error_code = "degenerate_variance"
    message = "Training split has degenerate variance"


class LabelRangeError(DatasetException, ValidationException):
    """Raised when a regression label is outside the normaliser bounds."""

    error_code = "label_out_of_range"
    message = "Label outside normalisation bounds"


# Numerical substrate

class NetworkException(RadCharException):
    """Base exception for tensor and layer operations."""

    error_code = "network_error"
    message = "Network operation failed"


class ShapeError(NetworkException):
    """Raised when tensor shapes are incompatible."""

    error_code = "shape_mismatch"
    message = "Tensor shapes are incompatible"


class AutogradError(NetworkException):
    """Raised when backward is requested without a recorded computation."""

    error_code = "autograd_error"
    message = "Invalid backward pass"


class NonFiniteTensorError(NetworkException):
    """Raised when an operation produces NaN or Inf."""

    exit_code = ExitCode.NUMERICAL
    error_code = "non_finite_tensor"
    message = "Operation produced non-finite values"


class ModelConfigValidationError(NetworkException, ValidationException):
    """Raised when a model configuration is invalid."""

    error_code = "model_config_invalid"
    message = "Model configuration is invalid"


class CheckpointFormatError(NetworkException):
    """Raised when a checkpoint file is malformed or incompatible."""

    exit_code = ExitCode.FORMAT
    error_code = "checkpoint_format_error"
    message = "Checkpoint file is malformed"


# Training and evaluation

class TrainingException(RadCharException):
    """Base exception for training and evaluation."""

    error_code = "training_error"
    message = "Training failed"


class TrainingDivergedError(TrainingException):
    """Raised when the multi-task loss becomes NaN or Inf."""

    exit_code = ExitCode.NUMERICAL
    error_code = "training_diverged"
    message = "Training loss became non-finite"


class StatsMismatchError(TrainingException):
    """Raised when a checkpoint was trained on a different dataset."""

    exit_code = ExitCode.MISMATCH
    error_code = "stats_mismatch"
    message = "Checkpoint and dataset do not match"


class InputFormatError(TrainingException):
    """Raised when an inference input file is malformed."""

    exit_code = ExitCode.FORMAT
    error_code = "input_format_error"
    message = "Input IQ file is malformed"
