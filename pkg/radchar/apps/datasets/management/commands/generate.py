"""
Generate a RadChar dataset file and its metadata sidecar.
"""

from django.conf import settings
from rich.table import Table

from radchar.apps.core.commands import RadCharCommand
from radchar.apps.datasets.config import DatasetConfig
from radchar.apps.datasets.generation import generate
from radchar.apps.waveforms.params import SNR_RANGE_DB, SignalClass

DEFAULT_OUT = "radchar.radc"


class Command(RadCharCommand):
    """Generate a dataset deterministically from a seed."""

    help = "Generate a synthetic pulsed radar dataset"

    def add_arguments(self, parser):
        super().add_arguments(parser)
        parser.add_argument("--count", type=int, help="Number of frames (default RADCHAR_DEFAULT_COUNT)")
        parser.add_argument("--seed", type=int, help="Dataset seed (default 0)")
        parser.add_argument("--snr-min", type=int, help="Lowest SNR in dB (default -20)")
        parser.add_argument("--snr-max", type=int, help="Highest SNR in dB (default 20)")
        parser.add_argument("--out", help=f"Output file (default {DEFAULT_OUT} in RADCHAR_DATA_DIR)")
        parser.add_argument("--workers", type=int, help="Parallel workers; output is identical for any value")

    def handle(self, *args, **options):
        config = DatasetConfig(
            count=self.option("count", settings.RADCHAR_DEFAULT_COUNT, int),
            seed=self.option("seed", 0, int),
            snr_min=self.option("snr_min", SNR_RANGE_DB[0], int),
            snr_max=self.option("snr_max", SNR_RANGE_DB[1], int),
        ).validate()
        out = self.resolve_path(self.option("out", DEFAULT_OUT), create_parent=True)
        workers = self.option("workers", settings.RADCHAR_WORKERS, int)

        summary = generate(config, out, workers=workers, progress=self.show_progress)

        table = Table(title="Class histogram")
        table.add_column("Class")
        table.add_column("Records", justify="right")
        table.add_column("Share", justify="right")
        for signal_class in SignalClass:
            n = int(summary.class_histogram[signal_class])
            table.add_row(signal_class.label, str(n), f"{n / summary.count:.1%}")
        self.render(table)

        self.stdout.write(f"SNR span: {summary.snr_span[0]:+.0f} dB to {summary.snr_span[1]:+.0f} dB")
        self.stdout.write(f"File size: {summary.file_size} bytes")
        self.stdout.write(f"Sidecar: {summary.sidecar}")
        self.stdout.write(
            self.style.SUCCESS(f"Generated {summary.count} records into {summary.path}")
        )
