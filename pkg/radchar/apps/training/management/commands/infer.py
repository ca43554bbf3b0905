"""
Classify and characterise a single IQ frame.
"""

from rich.table import Table

from radchar.apps.core.commands import RadCharCommand
from radchar.apps.core.exceptions import ConfigurationException
from radchar.apps.training.evaluation import load_trained
from radchar.apps.training.inference import infer, read_iq_file


class Command(RadCharCommand):
    help = "Run a trained model on one IQ frame (.npy or .csv)"

    def add_arguments(self, parser):
        super().add_arguments(parser)
        parser.add_argument("--checkpoint", help="Checkpoint written by train")
        parser.add_argument("--input", help="IQ frame: (2, 512) .npy, complex (512,) .npy, or CSV with i,q columns")

    def handle(self, *args, **options):
        checkpoint_path = self.option("checkpoint")
        input_path = self.option("input")
        if checkpoint_path is None or input_path is None:
            raise ConfigurationException("infer needs --checkpoint and --input")

        trained = load_trained(self.resolve_path(checkpoint_path))
        frame = read_iq_file(self.resolve_path(input_path))
        result = infer(trained, frame)

        table = Table(title=f"Prediction for {input_path}")
        table.add_column("Quantity")
        table.add_column("Estimate", justify="right")
        table.add_row("Class", result.signal_class.label)
        table.add_row("Probability", f"{result.probability:.4f}")
        table.add_row("Pulse width", f"{result.t_pw_s * 1e6:.3f} us")
        table.add_row("PRI", f"{result.t_pri_s * 1e6:.3f} us")
        table.add_row("Pulses", f"{result.n_p} (raw {result.n_p_raw:.3f})")
        table.add_row("Delay", f"{result.t_d_s * 1e6:.3f} us")
        self.render(table)
