"""
Print one record's parameters and optionally dump its samples as CSV.
"""

import numpy as np
import pandas as pd
from rich.table import Table

from radchar.apps.core.commands import RadCharCommand
from radchar.apps.core.exceptions import ConfigurationException, DatasetIOError
from radchar.apps.datasets.sampling import generate_record
from radchar.apps.datasets.storage import RadCharDataset


class Command(RadCharCommand):
    help = "Show the parameters of one dataset record"

    def add_arguments(self, parser):
        super().add_arguments(parser)
        parser.add_argument("--dataset", help="Dataset file")
        parser.add_argument("--index", type=int, help="Record index")
        parser.add_argument("--dump-csv", help="Write t_us,i,q rows of the frame to this file")

    def handle(self, *args, **options):
        dataset_path = self.option("dataset")
        index = self.option("index", cast=int)
        if dataset_path is None or index is None:
            raise ConfigurationException("inspect needs --dataset and --index")

        dataset = RadCharDataset(self.resolve_path(dataset_path))
        record = dataset.record(index)
        params = record.params

        table = Table(title=f"Record {record.index} of {dataset.path.name}")
        table.add_column("Field")
        table.add_column("Value", justify="right")
        table.add_row("class", params.signal_class.label)
        table.add_row("t_pw", f"{params.t_pw * 1e6:.4f} us")
        table.add_row("t_pri", f"{params.t_pri * 1e6:.4f} us")
        table.add_row("n_p", str(params.n_p))
        table.add_row("t_d", f"{params.t_d * 1e6:.4f} us")
        table.add_row("l_c", str(params.l_c))
        table.add_row("snr_db", f"{params.snr_db:+.0f}")
        table.add_row("power", f"{record.frame.mean_power():.4f}")
        self.render(table)

        if dataset.metadata is not None:
            regenerated = generate_record(dataset.config, record.index)
            match = regenerated.params == params and np.array_equal(
                regenerated.frame.to_array(np.float32), record.frame.to_array(np.float32)
            )
            self.stdout.write(f"Regeneration from seed {dataset.config.seed}: {'match' if match else 'MISMATCH'}")

        dump = self.option("dump_csv")
        if dump:
            path = self.resolve_path(dump, create_parent=True)
            frame = pd.DataFrame(
                {
                    "t_us": np.arange(len(record.frame)) / dataset.f_s * 1e6,
                    "i": record.frame.i,
                    "q": record.frame.q,
                }
            )
            try:
                frame.to_csv(path, index=False, float_format="%.9g")
            except OSError as exc:
                raise DatasetIOError(f"Cannot write {path}: {exc}") from exc
            self.stdout.write(self.style.SUCCESS(f"Wrote {len(frame)} samples to {path}"))
