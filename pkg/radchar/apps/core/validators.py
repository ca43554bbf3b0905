"""
Validation framework for signal, dataset and training parameters.
Validators collect every violation before anything is raised.
"""

import math
from typing import Dict, Iterable, List, Sequence, Tuple, Type

from .exceptions import ErrorDetail, ValidationException


class ValidationResult:
    """Result of validation with errors and warnings."""
    def __init__(self):
        self.errors: List[Tuple[str, str, Dict]] = []  # (field, message, context)
        self.warnings: List[Tuple[str, str]] = []  # (field, message)
        self.is_valid = True

    def add_error(self, field: str, message: str, context: Dict = None):
        """Add validation error."""
        self.errors.append((field, message, context or {}))
        self.is_valid = False

    def add_warning(self, field: str, message: str):
        """Add validation warning."""
        self.warnings.append((field, message))

    def merge(self, other: "ValidationResult") -> "ValidationResult":
        """Fold another result into this one."""
        for field, message, context in other.errors:
            self.add_error(field, message, context)
        self.warnings.extend(other.warnings)
        return self

    def to_details(self) -> List[ErrorDetail]:
        return [
            ErrorDetail(message=message, code="invalid", field=field, context=context or None)
            for field, message, context in self.errors
        ]

    def raise_for_errors(
        self,
        exc_class: Type[ValidationException] = ValidationException,
        message: str = None,
    ) -> None:
        """Raise ``exc_class`` carrying one detail per failed field."""
        if self.is_valid:
            return
        raise exc_class(message, details=self.to_details())

    def __bool__(self) -> bool:
        return self.is_valid


def _is_number(value) -> bool:
    try:
        return value is not None and math.isfinite(float(value))
    except (TypeError, ValueError):
        return False


class RangeValidator:
    """Generic numeric range checks shared by the domain validators."""

    @staticmethod
    def validate_range(
        field: str,
        value,
        low: float,
        high: float,
        rel_tol: float = 0.0,
    ) -> ValidationResult:
        """Validate ``low <= value <= high`` with an optional relative slack."""
        result = ValidationResult()

        if not _is_number(value):
            result.add_error(field, f"{field} must be a finite number", {"value": value})
            return result

        slack = rel_tol * max(abs(low), abs(high))
        if float(value) < low - slack or float(value) > high + slack:
            result.add_error(
                field,
                f"{field} must lie within [{low:g}, {high:g}]",
                {"min": low, "max": high, "actual": float(value)},
            )

        return result

    @staticmethod
    def validate_positive(field: str, value, allow_zero: bool = False) -> ValidationResult:
        """Validate a strictly positive (or non-negative) number."""
        result = ValidationResult()

        if not _is_number(value):
            result.add_error(field, f"{field} must be a finite number", {"value": value})
        elif float(value) < 0 or (float(value) == 0 and not allow_zero):
            bound = "non-negative" if allow_zero else "positive"
            result.add_error(field, f"{field} must be {bound}", {"actual": value})

        return result

    @staticmethod
    def validate_integer(field: str, value, low: int = None, high: int = None) -> ValidationResult:
        """Validate an integer with optional inclusive bounds."""
        result = ValidationResult()

        if isinstance(value, bool) or not isinstance(value, (int,)) and not (
            _is_number(value) and float(value).is_integer()
        ):
            result.add_error(field, f"{field} must be an integer", {"value": value})
            return result

        value = int(value)
        if low is not None and value < low:
            result.add_error(field, f"{field} must be at least {low}", {"min": low, "actual": value})
        if high is not None and value > high:
            result.add_error(field, f"{field} must be at most {high}", {"max": high, "actual": value})

        return result


class WaveformValidator:
    """Validators for pulsed radar waveform parameters."""

    @staticmethod
    def validate_code_length(signal_class: str, l_c: int, valid_lengths: Iterable[int]) -> ValidationResult:
        """Validate a code length against the lengths defined for its class."""
        result = ValidationResult()
        valid = tuple(valid_lengths)

        if l_c not in valid:
            result.add_error(
                "l_c",
                f"Code length {l_c} is not valid for {signal_class}",
                {"valid": list(valid), "actual": l_c},
            )

        return result

    @staticmethod
    def validate_frame_extent(extent_s: float, frame_duration_s: float) -> ValidationResult:
        """Validate that the pulse train ends inside the frame."""
        result = ValidationResult()

        if extent_s > frame_duration_s:
            result.add_error(
                "extent",
                f"Pulse train extent {extent_s * 1e6:.3f} us exceeds the "
                f"{frame_duration_s * 1e6:.3f} us frame",
                {"extent_s": extent_s, "frame_s": frame_duration_s},
            )

        return result

    @staticmethod
    def validate_sampling_rate(f_s_hz: float, bound_hz: float, rel_tol: float = 1e-6) -> ValidationResult:
        """Validate the non-strict Nyquist bound ``f_s >= bound``."""
        result = ValidationResult()

        if f_s_hz < bound_hz * (1.0 - rel_tol):
            result.add_error(
                "f_s",
                f"Sampling rate {f_s_hz:g} Hz is below the required {bound_hz:g} Hz",
                {"f_s": f_s_hz, "required": bound_hz},
            )

        return result


class DatasetValidator:
    """Validators for dataset generation settings."""

    @staticmethod
    def validate_count(count) -> ValidationResult:
        return RangeValidator.validate_integer("count", count, low=1)

    @staticmethod
    def validate_snr_bounds(snr_min, snr_max, low: int, high: int) -> ValidationResult:
        """Validate an integer SNR window inside ``[low, high]``."""
        result = ValidationResult()
        result.merge(RangeValidator.validate_integer("snr_min", snr_min, low, high))
        result.merge(RangeValidator.validate_integer("snr_max", snr_max, low, high))

        if result and snr_min > snr_max:
            result.add_error(
                "snr_min",
                "snr_min must not exceed snr_max",
                {"snr_min": snr_min, "snr_max": snr_max},
            )

        return result

    @staticmethod
    def validate_subrange(field: str, subrange: Sequence[float], low: float, high: float) -> ValidationResult:
        """Validate a ``(min, max)`` pair nested in ``[low, high]``."""
        result = ValidationResult()

        if len(subrange) != 2:
            result.add_error(field, f"{field} must be a (min, max) pair", {"value": list(subrange)})
            return result

        lo, hi = subrange
        result.merge(RangeValidator.validate_range(f"{field}.min", lo, low, high))
        result.merge(RangeValidator.validate_range(f"{field}.max", hi, low, high))
        if result and lo > hi:
            result.add_error(field, f"{field} minimum exceeds its maximum", {"min": lo, "max": hi})

        return result

    @staticmethod
    def validate_workers(workers) -> ValidationResult:
        return RangeValidator.validate_integer("workers", workers, low=1)


class TrainingValidator:
    """Validators for training hyperparameters."""

    @staticmethod
    def validate_task_weights(weights: Dict[str, float]) -> ValidationResult:
        """Validate non-negative task weights with at least one active task."""
        result = ValidationResult()

        for name, weight in weights.items():
            result.merge(RangeValidator.validate_positive(f"weights.{name}", weight, allow_zero=True))

        if result and sum(weights.values()) <= 0:
            result.add_error("weights", "At least one task weight must be positive", {})

        return result

    @staticmethod
    def validate_hyperparameters(epochs, lr, batch_size) -> ValidationResult:
        result = ValidationResult()
        result.merge(RangeValidator.validate_integer("epochs", epochs, low=1))
        result.merge(RangeValidator.validate_positive("lr", lr))
        result.merge(RangeValidator.validate_integer("batch_size", batch_size, low=1))
        return result
