"""
CSV and console renderings of an evaluation report.
"""

import logging
from pathlib import Path
from typing import Sequence

import numpy as np
from rich.table import Table

from radchar.apps.waveforms.params import SignalClass

from .evaluation import MAE_COLUMNS, EvalReport

logger = logging.getLogger(__name__)

REPORT_COLUMNS = ("snr_db", "accuracy") + MAE_COLUMNS

# The three SNR levels highlighted in the console summary.
HIGHLIGHT_SNR = (-10, 0, 10)

_TASK_ROWS = (
    ("accuracy", "Classification accuracy"),
    ("mae_np", "n_p MAE (pulses)"),
    ("mae_tpw_us", "PW MAE (us)"),
    ("mae_tpri_us", "PRI MAE (us)"),
    ("mae_td_us", "TD MAE (us)"),
)


def report_csv(report: EvalReport, path: Path) -> Path:
    """
    Write one row per SNR bin. Empty bins are kept and hold ``NaN``; the
    output is byte-identical for identical reports.
    """
    path = Path(path)
    frame = report.to_frame()[list(REPORT_COLUMNS)]
    frame.to_csv(path, index=False, float_format="%.6f", na_rep="NaN", lineterminator="\n")
    logger.info("Wrote %d SNR bins to %s", len(frame), path)
    return path


def _cell(value: float) -> str:
    if np.isnan(value):
        return "n/a"
    return f"{value:.3f}"


def snr_table(report: EvalReport, snr_levels: Sequence[int] = HIGHLIGHT_SNR) -> Table:
    """Tasks as rows, the chosen SNR levels as columns."""
    table = Table(title="Performance by SNR")
    table.add_column("Task")
    for snr in snr_levels:
        table.add_column(f"{snr} dB", justify="right")
    bins = [report.bin(snr) for snr in snr_levels]
    for key, label in _TASK_ROWS:
        table.add_row(label, *(_cell(b[key]) for b in bins))
    table.add_row("Records", *(str(b["count"]) for b in bins))
    return table


def overall_table(report: EvalReport) -> Table:
    table = Table(title="All SNR levels")
    table.add_column("Metric")
    table.add_column("Value", justify="right")
    table.add_row("Classification accuracy", _cell(report.overall_accuracy))
    for (_, label), value in zip(_TASK_ROWS[1:], report.overall_mae):
        table.add_row(label, _cell(float(value)))
    spearman = "n/a" if np.isnan(report.spearman) else f"{report.spearman:.3f}"
    table.add_row("Spearman(SNR, accuracy)", spearman)
    return table


def confusion_table(report: EvalReport) -> Table:
    table = Table(title="Confusion matrix (rows: true, columns: predicted)")
    table.add_column("")
    for signal_class in SignalClass:
        table.add_column(signal_class.label, justify="right")
    for signal_class in SignalClass:
        table.add_row(signal_class.label, *(str(int(n)) for n in report.confusion[signal_class]))
    return table
