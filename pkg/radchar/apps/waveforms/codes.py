"""
Phase codes for pulse compression.

Barker and polyphase Barker codes are embedded tables; Frank codes are
computed. Every code is returned as a chip phase vector in radians except
``barker_code`` which returns the ±1 chips.
"""

from math import isqrt
from typing import Dict, Tuple

import numpy as np

from radchar.apps.core.exceptions import ErrorDetail, InvalidCodeLength

from .params import SignalClass, VALID_CODE_LENGTHS

BARKER_CODES: Dict[int, Tuple[int, ...]] = {
    1: (1,),
    2: (1, -1),
    3: (1, 1, -1),
    4: (1, 1, -1, 1),
    5: (1, 1, 1, -1, 1),
    7: (1, 1, 1, -1, -1, 1, -1),
    11: (1, 1, 1, -1, -1, -1, 1, -1, -1, 1, -1),
    13: (1, 1, 1, 1, 1, -1, -1, 1, 1, -1, 1, -1, 1),
}

# Generalised Barker sequences over the sixth roots of unity.
# Chip phase is k * pi / 3 for each listed k.
POLYPHASE_BARKER_SIXTHS: Dict[int, Tuple[int, ...]] = {
    1: (0,),
    2: (0, 3),
    3: (0, 1, 0),
    4: (0, 0, 2, 0),
    5: (0, 0, 0, 3, 0),
    6: (0, 2, 3, 3, 2, 0),
    7: (0, 0, 1, 4, 5, 2, 0),
    8: (0, 0, 1, 3, 0, 3, 2, 0),
    9: (0, 0, 0, 1, 4, 0, 3, 2, 0),
    10: (0, 0, 1, 2, 5, 5, 3, 5, 2, 0),
    11: (0, 0, 1, 1, 1, 4, 5, 2, 4, 2, 0),
    12: (0, 1, 1, 0, 1, 2, 5, 5, 3, 1, 3, 0),
    13: (0, 0, 1, 4, 4, 5, 3, 5, 1, 5, 5, 2, 0),
}

MAX_FRANK_ORDER = 4


def _invalid_length(kind: str, length: int, valid) -> InvalidCodeLength:
    return InvalidCodeLength(
        f"No {kind} code of length {length}",
        details=[
            ErrorDetail(
                message=f"valid lengths are {sorted(valid)}",
                code="invalid_length",
                field="l_c",
                context={"actual": length},
            )
        ],
    )


def barker_code(length: int) -> np.ndarray:
    """Return the biphase Barker chips (+1/-1) of ``length``."""
    try:
        return np.array(BARKER_CODES[int(length)], dtype=np.float64)
    except KeyError:
        raise _invalid_length("Barker", length, BARKER_CODES) from None


def frank_code(m: int) -> np.ndarray:
    """
    Frank code of order ``m``.

    Chip ``n * m + k`` carries phase ``2 * pi / m * n * k``.

    Args:
        m: Order of the code, 1 to 4.

    Returns:
        Phase vector of length ``m ** 2`` in radians.
    """
    if int(m) != m or not 1 <= m <= MAX_FRANK_ORDER:
        raise _invalid_length("Frank", m, range(1, MAX_FRANK_ORDER + 1))
    m = int(m)
    index = np.arange(m)
    return (2.0 * np.pi / m * np.outer(index, index)).ravel()


def polyphase_barker_code(length: int) -> np.ndarray:
    """Return the generalised Barker phase vector of ``length`` (1 to 13)."""
    try:
        sixths = POLYPHASE_BARKER_SIXTHS[int(length)]
    except KeyError:
        raise _invalid_length("polyphase Barker", length, POLYPHASE_BARKER_SIXTHS) from None
    return np.array(sixths, dtype=np.float64) * (np.pi / 3.0)


def code_phases(signal_class: SignalClass, l_c: int) -> np.ndarray:
    """Chip phases used by ``signal_class`` for a code of ``l_c`` chips."""
    if l_c not in VALID_CODE_LENGTHS[signal_class]:
        raise _invalid_length(signal_class.label, l_c, VALID_CODE_LENGTHS[signal_class])

    if signal_class is SignalClass.BARKER:
        return np.where(barker_code(l_c) < 0, np.pi, 0.0)
    if signal_class is SignalClass.POLYPHASE_BARKER:
        return polyphase_barker_code(l_c)
    if signal_class is SignalClass.FRANK:
        return frank_code(isqrt(int(l_c)))
    return np.zeros(1)


def aperiodic_autocorrelation(chips: np.ndarray) -> np.ndarray:
    """Full aperiodic autocorrelation; the zero-lag peak sits at index ``len(chips) - 1``."""
    chips = np.asarray(chips)
    return np.correlate(chips, chips, mode="full")


def peak_sidelobe(chips: np.ndarray) -> float:
    """Largest off-peak autocorrelation magnitude."""
    chips = np.asarray(chips)
    if len(chips) < 2:
        return 0.0
    magnitude = np.abs(aperiodic_autocorrelation(chips))
    centre = len(chips) - 1
    return float(np.max(np.delete(magnitude, centre)))


def phases_to_chips(phases: np.ndarray) -> np.ndarray:
    """Unit-magnitude complex chips ``exp(j*phase)`` for a phase sequence in radians."""
    return np.exp(1j * np.asarray(phases))
