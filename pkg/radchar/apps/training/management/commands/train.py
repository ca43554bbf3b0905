"""
Train a multi-task model on a dataset file.
"""

from rich.table import Table

from radchar.apps.core.commands import RadCharCommand
from radchar.apps.core.exceptions import ConfigurationException
from radchar.apps.datasets.storage import RadCharDataset
from radchar.apps.networks.config import BackboneKind, ModelConfig
from radchar.apps.networks.model import build_model
from radchar.apps.training.config import TaskWeights, TrainConfig
from radchar.apps.training.trainer import fit

DEFAULT_OUT = "model.ckpt"


class Command(RadCharCommand):
    help = "Train a multi-task classifier and characteriser"

    def add_arguments(self, parser):
        super().add_arguments(parser)
        parser.add_argument("--dataset", help="Dataset file")
        parser.add_argument("--model", help=f"Backbone: {', '.join(BackboneKind.choices())} (default iqst-s)")
        parser.add_argument("--epochs", type=int, help="Epochs (default 100)")
        parser.add_argument("--lr", type=float, help="Adam learning rate (default 5e-4)")
        parser.add_argument("--batch-size", type=int, help="Mini-batch size (default 64)")
        parser.add_argument("--seed", type=int, help="Seed for initialisation, dropout and shuffling (default 0)")
        parser.add_argument("--weights", help="Task weights class,n_p,t_pw,t_pri,t_d (default 0.1,0.225,0.225,0.225,0.225)")
        parser.add_argument("--out", help=f"Best-validation checkpoint (default {DEFAULT_OUT} in RADCHAR_DATA_DIR)")
        parser.add_argument("--subset", type=int, help="Train on the first N training-split records only")
        parser.add_argument("--conv-layers", type=int, help="Convolution blocks in CNN backbones (default 1)")
        parser.add_argument("--d-model", type=int, help="Transformer embedding width (default 128)")

    def handle(self, *args, **options):
        dataset_path = self.option("dataset")
        if dataset_path is None:
            raise ConfigurationException("train needs --dataset")

        model_config = ModelConfig(
            backbone=self.option("model", BackboneKind.IQST_S.value, str),
            conv_layers=self.option("conv_layers", 1, int),
            d_model=self.option("d_model", 128, int),
        ).validate()
        weights = self.option("weights")
        config = TrainConfig(
            epochs=self.option("epochs", 100, int),
            lr=self.option("lr", 5e-4, float),
            batch_size=self.option("batch_size", 64, int),
            seed=self.option("seed", 0, int),
            weights=TaskWeights.parse(weights) if weights is not None else TaskWeights(),
            subset=self.option("subset", cast=int),
            model=model_config,
        ).validate()

        dataset = RadCharDataset(self.resolve_path(dataset_path))
        out = self.resolve_path(self.option("out", DEFAULT_OUT), create_parent=True)
        model = build_model(model_config, seed=config.seed)
        result = fit(model, dataset, config, out, progress=self.show_progress)

        table = Table(title="Training summary")
        table.add_column("Item")
        table.add_column("Value", justify="right")
        table.add_row("Backbone", model_config.backbone.value)
        table.add_row("Parameters", f"{model.num_parameters():,}")
        table.add_row("Best epoch", str(result.best_epoch))
        table.add_row("Best validation loss", f"{result.best_val_loss:.5f}")
        table.add_row("Final training loss", f"{result.history[-1].train_loss:.5f}")
        self.render(table)

        self.stdout.write(f"Last-epoch checkpoint: {result.last_path}")
        self.stdout.write(f"Training log: {result.log_path}")
        self.stdout.write(self.style.SUCCESS(f"Saved best checkpoint to {result.best_path}"))
