"""
Signal classes, parameter bounds and the ground-truth record of one waveform.
"""

from dataclasses import asdict, dataclass
from enum import IntEnum
from typing import Any, Dict, Tuple

import numpy as np

from radchar.apps.core.exceptions import SignalParamsValidationError
from radchar.apps.core.validators import RangeValidator, ValidationResult, WaveformValidator

F_S_HZ = 3.2e6
SAMPLES_PER_FRAME = 512
FRAME_DURATION_S = SAMPLES_PER_FRAME / F_S_HZ  # 160 us

# Linear up-chirp from 0 Hz.
LFM_BANDWIDTH_HZ = 800e3

T_PW_RANGE_S: Tuple[float, float] = (10e-6, 16e-6)
T_PRI_RANGE_S: Tuple[float, float] = (17e-6, 23e-6)
T_D_RANGE_S: Tuple[float, float] = (1e-6, 10e-6)
N_P_RANGE: Tuple[int, int] = (2, 6)
SNR_RANGE_DB: Tuple[int, int] = (-20, 20)

# Stored labels are float32; bounds are checked with this relative slack.
FLOAT32_REL_TOL = 1e-6


class SignalClass(IntEnum):
    """The five pulsed radar classes. Values are the on-disk label encoding."""

    BARKER = 0
    POLYPHASE_BARKER = 1
    FRANK = 2
    LFM = 3
    UNMODULATED = 4

    @property
    def label(self) -> str:
        return _LABELS[self]

    @classmethod
    def from_label(cls, text: str) -> "SignalClass":
        key = text.strip().lower().replace("-", " ").replace("_", " ")
        for member in cls:
            if key in (member.label.lower(), member.name.lower().replace("_", " ")):
                return member
        raise ValueError(f"Unknown signal class: {text!r}")


_LABELS = {
    SignalClass.BARKER: "Barker",
    SignalClass.POLYPHASE_BARKER: "Polyphase Barker",
    SignalClass.FRANK: "Frank",
    SignalClass.LFM: "LFM",
    SignalClass.UNMODULATED: "Unmodulated",
}

VALID_CODE_LENGTHS: Dict[SignalClass, Tuple[int, ...]] = {
    SignalClass.BARKER: (2, 3, 4, 5, 7, 11, 13),
    SignalClass.POLYPHASE_BARKER: tuple(range(2, 14)),
    SignalClass.FRANK: (1, 4, 9, 16),
    SignalClass.LFM: (1,),
    SignalClass.UNMODULATED: (1,),
}

# A one-chip Frank pulse is an unmodulated pulse, so the sampler skips it.
SAMPLED_CODE_LENGTHS: Dict[SignalClass, Tuple[int, ...]] = {
    **VALID_CODE_LENGTHS,
    SignalClass.FRANK: (4, 9, 16),
}


@dataclass(frozen=True)
class SignalParams:
    """
    Ground truth of one waveform.

    Times are in seconds, ``snr_db`` in decibels and ``l_c`` in chips.
    """

    signal_class: SignalClass
    t_pw: float
    t_pri: float
    n_p: int
    t_d: float
    l_c: int
    snr_db: float

    @property
    def extent_s(self) -> float:
        """Time from frame start to the end of the last pulse."""
        return self.t_d + (self.n_p - 1) * self.t_pri + self.t_pw

    def check(self) -> ValidationResult:
        """Collect every bound violation without raising."""
        result = ValidationResult()

        if not isinstance(self.signal_class, SignalClass):
            result.add_error("signal_class", "signal_class must be a SignalClass", {"value": self.signal_class})
            return result

        result.merge(RangeValidator.validate_range("t_pw", self.t_pw, *T_PW_RANGE_S, rel_tol=FLOAT32_REL_TOL))
        result.merge(RangeValidator.validate_range("t_pri", self.t_pri, *T_PRI_RANGE_S, rel_tol=FLOAT32_REL_TOL))
        result.merge(RangeValidator.validate_range("t_d", self.t_d, *T_D_RANGE_S, rel_tol=FLOAT32_REL_TOL))
        result.merge(RangeValidator.validate_integer("n_p", self.n_p, *N_P_RANGE))
        result.merge(RangeValidator.validate_range("snr_db", self.snr_db, *SNR_RANGE_DB))
        result.merge(
            WaveformValidator.validate_code_length(
                self.signal_class.label, self.l_c, VALID_CODE_LENGTHS[self.signal_class]
            )
        )
        if result:
            result.merge(WaveformValidator.validate_frame_extent(self.extent_s, FRAME_DURATION_S))

        return result

    def validate(self) -> "SignalParams":
        """Raise ``SignalParamsValidationError`` listing every violated bound."""
        self.check().raise_for_errors(SignalParamsValidationError)
        return self

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        data["signal_class"] = self.signal_class.label
        return data

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "SignalParams":
        signal_class = data["signal_class"]
        if isinstance(signal_class, str):
            signal_class = SignalClass.from_label(signal_class)
        return cls(
            signal_class=SignalClass(signal_class),
            t_pw=float(data["t_pw"]),
            t_pri=float(data["t_pri"]),
            n_p=int(data["n_p"]),
            t_d=float(data["t_d"]),
            l_c=int(data["l_c"]),
            snr_db=float(data["snr_db"]),
        )


@dataclass(frozen=True, eq=False)
class IQFrame:
    """512 baseband samples held as separate I and Q channels."""

    i: np.ndarray
    q: np.ndarray
    f_s: float = F_S_HZ

    @classmethod
    def from_complex(cls, samples: np.ndarray, f_s: float = F_S_HZ) -> "IQFrame":
        samples = np.asarray(samples)
        return cls(i=samples.real.astype(np.float64), q=samples.imag.astype(np.float64), f_s=f_s)

    @classmethod
    def from_array(cls, array: np.ndarray, f_s: float = F_S_HZ) -> "IQFrame":
        """Build from a ``(2, N)`` array of I and Q rows."""
        array = np.asarray(array)
        return cls(i=array[0], q=array[1], f_s=f_s)

    def to_complex(self) -> np.ndarray:
        return self.i + 1j * self.q

    def to_array(self, dtype=np.float32) -> np.ndarray:
        """Return the ``(2, N)`` channel-first layout used by the models."""
        return np.stack([self.i, self.q]).astype(dtype)

    def mean_power(self) -> float:
        return float(np.mean(self.i ** 2 + self.q ** 2))

    def __len__(self) -> int:
        return len(self.i)
