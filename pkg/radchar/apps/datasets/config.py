"""
Dataset generation settings.
"""

import hashlib
import json
from dataclasses import asdict, dataclass, field
from typing import Any, Dict, Tuple

from radchar.apps.core.exceptions import DatasetConfigValidationError
from radchar.apps.core.validators import DatasetValidator, RangeValidator, ValidationResult, WaveformValidator
from radchar.apps.waveforms.params import (
    F_S_HZ,
    N_P_RANGE,
    SAMPLED_CODE_LENGTHS,
    SAMPLES_PER_FRAME,
    SNR_RANGE_DB,
    T_D_RANGE_S,
    T_PRI_RANGE_S,
    T_PW_RANGE_S,
)

FORMAT_VERSION = 1

MAX_SEED = 2 ** 64 - 1
MAX_CODE_LENGTH = max(max(lengths) for lengths in SAMPLED_CODE_LENGTHS.values())


def canonical_json(data: Any) -> str:
    """JSON with sorted keys and no whitespace, stable across runs."""
    return json.dumps(data, sort_keys=True, separators=(",", ":"))


@dataclass(frozen=True)
class DatasetConfig:
    """
    Everything that determines the content of a dataset file.

    Two configs that compare equal generate byte-identical files.
    """

    count: int
    seed: int = 0
    snr_min: int = SNR_RANGE_DB[0]
    snr_max: int = SNR_RANGE_DB[1]
    t_pw_range: Tuple[float, float] = T_PW_RANGE_S
    t_pri_range: Tuple[float, float] = T_PRI_RANGE_S
    t_d_range: Tuple[float, float] = T_D_RANGE_S
    n_p_range: Tuple[int, int] = N_P_RANGE
    f_s: float = F_S_HZ
    samples_per_frame: int = field(default=SAMPLES_PER_FRAME)

    def check(self) -> ValidationResult:
        result = ValidationResult()
        result.merge(DatasetValidator.validate_count(self.count))
        result.merge(RangeValidator.validate_integer("seed", self.seed, 0, MAX_SEED))
        result.merge(DatasetValidator.validate_snr_bounds(self.snr_min, self.snr_max, *SNR_RANGE_DB))
        result.merge(DatasetValidator.validate_subrange("t_pw_range", self.t_pw_range, *T_PW_RANGE_S))
        result.merge(DatasetValidator.validate_subrange("t_pri_range", self.t_pri_range, *T_PRI_RANGE_S))
        result.merge(DatasetValidator.validate_subrange("t_d_range", self.t_d_range, *T_D_RANGE_S))
        result.merge(DatasetValidator.validate_subrange("n_p_range", self.n_p_range, *N_P_RANGE))

        if self.samples_per_frame != SAMPLES_PER_FRAME:
            result.add_error(
                "samples_per_frame",
                f"Frames must hold exactly {SAMPLES_PER_FRAME} samples",
                {"actual": self.samples_per_frame},
            )
        result.merge(RangeValidator.validate_positive("f_s", self.f_s))
        if not result:
            return result

        result.merge(WaveformValidator.validate_frame_extent(self.max_extent_s, self.samples_per_frame / self.f_s))
        result.merge(WaveformValidator.validate_sampling_rate(self.f_s, self.worst_case_sampling_rate))
        return result

    def validate(self) -> "DatasetConfig":
        self.check().raise_for_errors(DatasetConfigValidationError)
        return self

    @property
    def max_extent_s(self) -> float:
        return self.t_d_range[1] + (self.n_p_range[1] - 1) * self.t_pri_range[1] + self.t_pw_range[1]

    @property
    def worst_case_sampling_rate(self) -> float:
        return 2.0 * max(
            MAX_CODE_LENGTH / self.t_pw_range[0],
            1.0 / self.t_pri_range[0],
            1.0 / self.t_d_range[0],
        )

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        for key, value in data.items():
            if isinstance(value, tuple):
                data[key] = list(value)
        return data

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "DatasetConfig":
        kwargs = dict(data)
        for key in ("t_pw_range", "t_pri_range", "t_d_range"):
            if key in kwargs:
                kwargs[key] = tuple(float(v) for v in kwargs[key])
        if "n_p_range" in kwargs:
            kwargs["n_p_range"] = tuple(int(v) for v in kwargs["n_p_range"])
        unknown = set(kwargs) - set(cls.__dataclass_fields__)
        if unknown:
            raise DatasetConfigValidationError(f"Unknown dataset config keys: {sorted(unknown)}")
        return cls(**kwargs)

    def fingerprint(self) -> str:
        """SHA-256 of the canonical config and the file format version."""
        payload = canonical_json({"config": self.to_dict(), "format_version": FORMAT_VERSION})
        return hashlib.sha256(payload.encode("utf-8")).hexdigest()
