"""
Per-record parameter sampling.

Every record owns an independent random stream keyed by ``(seed, index)``,
so any record can be regenerated without touching the others.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from radchar.apps.waveforms.params import IQFrame, SAMPLED_CODE_LENGTHS, SignalClass, SignalParams
from radchar.apps.waveforms.synthesis import synthesize

from .config import DatasetConfig


@dataclass(frozen=True, eq=False)
class DatasetRecord:
    index: int
    params: SignalParams
    frame: IQFrame


def record_rng(seed: int, index: int) -> np.random.Generator:
    """Independent generator for record ``index`` of the dataset seeded with ``seed``."""
    sequence = np.random.SeedSequence(int(seed), spawn_key=(int(index),))
    return np.random.Generator(np.random.PCG64(sequence))


def _f32(value: float) -> float:
    return float(np.float32(value))


def draw_params(rng: np.random.Generator, config: DatasetConfig) -> SignalParams:
    """
    Draw one parameter set.

    Continuous values are rounded through float32 so that the stored
    labels equal the parameters the frame was synthesised from.
    """
    signal_class = SignalClass(int(rng.integers(len(SignalClass))))
    t_pw = _f32(rng.uniform(*config.t_pw_range))
    t_pri = _f32(rng.uniform(*config.t_pri_range))
    n_p = int(rng.integers(config.n_p_range[0], config.n_p_range[1] + 1))
    t_d = _f32(rng.uniform(*config.t_d_range))
    lengths = SAMPLED_CODE_LENGTHS[signal_class]
    l_c = int(lengths[int(rng.integers(len(lengths)))])
    snr_db = float(rng.integers(config.snr_min, config.snr_max + 1))

    return SignalParams(
        signal_class=signal_class,
        t_pw=t_pw,
        t_pri=t_pri,
        n_p=n_p,
        t_d=t_d,
        l_c=l_c,
        snr_db=snr_db,
    )


def sample_params(seed: int, index: int, config: Optional[DatasetConfig] = None) -> SignalParams:
    """Parameters of record ``index``; the default config spans the full bounds."""
    config = config or DatasetConfig(count=index + 1, seed=seed)
    return draw_params(record_rng(seed, index), config)


def generate_record(config: DatasetConfig, index: int) -> DatasetRecord:
    """Regenerate record ``index`` of ``config``; noise continues the parameter stream."""
    rng = record_rng(config.seed, index)
    params = draw_params(rng, config)
    frame = synthesize(params, rng, f_s=config.f_s)
    return DatasetRecord(index=index, params=params, frame=frame)
