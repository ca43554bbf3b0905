"""
Baseband IQ synthesis of pulsed radar frames.

A frame is built in three steps: one pulse is shaped per class, copies are
placed on the pulse repetition grid, then the whole frame is scaled to unity
average power before noise is added.
"""

import logging

import numpy as np

from radchar.apps.core.exceptions import ErrorDetail, FrameOverflowError
from radchar.apps.core.validators import WaveformValidator

from .codes import code_phases
from .params import F_S_HZ, LFM_BANDWIDTH_HZ, SAMPLES_PER_FRAME, IQFrame, SignalClass, SignalParams

logger = logging.getLogger(__name__)

SAMPLING_REL_TOL = 1e-6


def to_samples(seconds: float, f_s: float = F_S_HZ) -> int:
    """Convert a time to a sample count, rounding halves up."""
    return int(np.floor(seconds * f_s + 0.5))


def chip_index(n_samples: int, l_c: int) -> np.ndarray:
    """
    Chip number of every sample of an ``n_samples`` pulse.

    Chip ``c`` covers samples ``floor(c * N / l_c)`` up to
    ``floor((c + 1) * N / l_c) - 1``.
    """
    starts = (np.arange(l_c) * n_samples) // l_c
    return np.searchsorted(starts, np.arange(n_samples), side="right") - 1


def synthesize_pulse(params: SignalParams, f_s: float = F_S_HZ) -> np.ndarray:
    """Return one unit-modulus complex pulse of ``round(t_pw * f_s)`` samples."""
    n_samples = to_samples(params.t_pw, f_s)

    if params.signal_class is SignalClass.UNMODULATED:
        return np.ones(n_samples, dtype=np.complex128)

    if params.signal_class is SignalClass.LFM:
        t = np.arange(n_samples) / f_s
        phase = np.pi * (LFM_BANDWIDTH_HZ / params.t_pw) * t ** 2
        return np.exp(1j * phase)

    phases = code_phases(params.signal_class, params.l_c)
    return np.exp(1j * phases[chip_index(n_samples, params.l_c)])


def pulse_starts(params: SignalParams, f_s: float = F_S_HZ) -> np.ndarray:
    """First sample of each of the ``n_p`` pulses."""
    return np.array(
        [to_samples(params.t_d + k * params.t_pri, f_s) for k in range(int(params.n_p))],
        dtype=np.int64,
    )


def synthesize_frame(
    params: SignalParams,
    f_s: float = F_S_HZ,
    n_samples: int = SAMPLES_PER_FRAME,
) -> IQFrame:
    """
    Noiseless frame with unity average power over all ``n_samples``.

    Raises:
        FrameOverflowError: The last pulse runs past the final sample.
    """
    pulse = synthesize_pulse(params, f_s)
    starts = pulse_starts(params, f_s)

    last_sample = int(starts[-1]) + len(pulse) - 1
    if last_sample >= n_samples:
        raise FrameOverflowError(
            f"Last pulse ends at sample {last_sample}, frame has {n_samples} samples",
            details=[
                ErrorDetail(
                    message="pulse train exceeds frame",
                    code="frame_overflow",
                    field="t_pri",
                    context={"last_sample": last_sample, "n_samples": n_samples},
                )
            ],
        )

    signal = np.zeros(n_samples, dtype=np.complex128)
    for start in starts:
        signal[start:start + len(pulse)] = pulse

    energy = float(np.sum(np.abs(signal) ** 2))
    signal *= np.sqrt(n_samples / energy)
    return IQFrame.from_complex(signal, f_s=f_s)


def noise_power(snr_db: float) -> float:
    """Total complex noise power for a unit-power signal at ``snr_db``."""
    return float(10.0 ** (-snr_db / 10.0))


def apply_awgn(frame: IQFrame, snr_db: float, rng: np.random.Generator) -> IQFrame:
    """
    Add circular complex Gaussian noise.

    I and Q each receive variance ``noise_power(snr_db) / 2``. The noise is
    drawn as one ``(2, N)`` block so the result depends only on the rng state.
    """
    sigma = np.sqrt(noise_power(snr_db) / 2.0)
    noise = rng.normal(0.0, sigma, size=(2, len(frame)))
    return IQFrame(i=frame.i + noise[0], q=frame.q + noise[1], f_s=frame.f_s)


def synthesize(params: SignalParams, rng: np.random.Generator, f_s: float = F_S_HZ) -> IQFrame:
    """Noiseless frame followed by AWGN at ``params.snr_db``."""
    return apply_awgn(synthesize_frame(params, f_s), params.snr_db, rng)


def min_sampling_rate(params: SignalParams) -> float:
    """Lowest admissible sampling rate, ``2 * max(l_c / t_pw, 1 / t_pri, 1 / t_d)``."""
    return 2.0 * max(params.l_c / params.t_pw, 1.0 / params.t_pri, 1.0 / params.t_d)


def satisfies_sampling_bound(params: SignalParams, f_s: float = F_S_HZ) -> bool:
    """Non-strict check ``f_s >= min_sampling_rate(params)``."""
    result = WaveformValidator.validate_sampling_rate(f_s, min_sampling_rate(params), SAMPLING_REL_TOL)
    if not result:
        logger.debug("Sampling bound violated for %s", params)
    return result.is_valid
