from django.test import SimpleTestCase

from radchar.apps.core.exceptions import (
    DatasetConfigValidationError,
    ExitCode,
    ValidationException,
)
from radchar.apps.core.validators import (
    DatasetValidator,
    RangeValidator,
    TrainingValidator,
    ValidationResult,
    WaveformValidator,
)


class ValidationResultTests(SimpleTestCase):
    def test_empty_result_is_valid(self):
        result = ValidationResult()
        self.assertTrue(result)
        result.raise_for_errors()

    def test_merge_collects_errors_from_both_results(self):
        first = RangeValidator.validate_integer("count", 0, low=1)
        second = RangeValidator.validate_positive("lr", -1.0)
        merged = ValidationResult().merge(first).merge(second)
        self.assertFalse(merged.is_valid)
        self.assertEqual([field for field, _, _ in merged.errors], ["count", "lr"])

    def test_raise_for_errors_carries_one_detail_per_field(self):
        result = DatasetValidator.validate_snr_bounds(5, -5, -20, 20)
        with self.assertRaises(DatasetConfigValidationError) as ctx:
            result.raise_for_errors(DatasetConfigValidationError)
        self.assertEqual(ctx.exception.exit_code, ExitCode.USAGE)
        self.assertEqual([d.field for d in ctx.exception.details], ["snr_min"])
        self.assertIn("snr_min", ctx.exception.describe())

    def test_default_exception_is_validation_exception(self):
        result = RangeValidator.validate_integer("n", "abc")
        with self.assertRaises(ValidationException):
            result.raise_for_errors()


class RangeValidatorTests(SimpleTestCase):
    def test_range_accepts_endpoints(self):
        self.assertTrue(RangeValidator.validate_range("t", 10e-6, 10e-6, 16e-6))
        self.assertTrue(RangeValidator.validate_range("t", 16e-6, 10e-6, 16e-6))

    def test_range_rejects_non_finite(self):
        self.assertFalse(RangeValidator.validate_range("t", float("nan"), 0.0, 1.0))
        self.assertFalse(RangeValidator.validate_range("t", None, 0.0, 1.0))

    def test_relative_slack(self):
        self.assertFalse(RangeValidator.validate_range("t", 1.0 + 1e-7, 0.0, 1.0))
        self.assertTrue(RangeValidator.validate_range("t", 1.0 + 1e-7, 0.0, 1.0, rel_tol=1e-6))

    def test_integer_rejects_booleans_and_fractions(self):
        self.assertFalse(RangeValidator.validate_integer("n", True))
        self.assertFalse(RangeValidator.validate_integer("n", 2.5))
        self.assertTrue(RangeValidator.validate_integer("n", 3.0, low=2, high=6))


class DomainValidatorTests(SimpleTestCase):
    def test_code_length_membership(self):
        self.assertTrue(WaveformValidator.validate_code_length("Barker", 13, (2, 3, 13)))
        self.assertFalse(WaveformValidator.validate_code_length("Barker", 6, (2, 3, 13)))

    def test_frame_extent(self):
        self.assertTrue(WaveformValidator.validate_frame_extent(141e-6, 160e-6))
        self.assertFalse(WaveformValidator.validate_frame_extent(161e-6, 160e-6))

    def test_sampling_rate_bound_is_non_strict(self):
        self.assertTrue(WaveformValidator.validate_sampling_rate(3.2e6, 3.2e6))
        self.assertFalse(WaveformValidator.validate_sampling_rate(3.0e6, 3.2e6))

    def test_subrange_must_be_ordered_and_nested(self):
        self.assertTrue(DatasetValidator.validate_subrange("t_pw", (11e-6, 12e-6), 10e-6, 16e-6))
        self.assertFalse(DatasetValidator.validate_subrange("t_pw", (12e-6, 11e-6), 10e-6, 16e-6))
        self.assertFalse(DatasetValidator.validate_subrange("t_pw", (9e-6, 11e-6), 10e-6, 16e-6))

    def test_task_weights(self):
        self.assertTrue(TrainingValidator.validate_task_weights({"a": 0.1, "b": 0.0}))
        self.assertFalse(TrainingValidator.validate_task_weights({"a": 0.0, "b": 0.0}))
        self.assertFalse(TrainingValidator.validate_task_weights({"a": -0.1, "b": 1.0}))

    def test_hyperparameters(self):
        self.assertTrue(TrainingValidator.validate_hyperparameters(100, 5e-4, 64))
        result = TrainingValidator.validate_hyperparameters(0, 0.0, 64)
        self.assertEqual(len(result.errors), 2)
