"""
Evaluate a checkpoint per SNR bin and optionally write the CSV report.
"""

from radchar.apps.core.commands import RadCharCommand
from radchar.apps.core.exceptions import ConfigurationException
from radchar.apps.datasets.storage import RadCharDataset
from radchar.apps.training.evaluation import evaluate, load_trained
from radchar.apps.training.reports import confusion_table, overall_table, report_csv, snr_table

SPLITS = ("train", "val", "test", "all")


class Command(RadCharCommand):
    help = "Evaluate a trained model on a dataset split"

    def add_arguments(self, parser):
        super().add_arguments(parser)
        parser.add_argument("--checkpoint", help="Checkpoint written by train")
        parser.add_argument("--dataset", help="Dataset the checkpoint was trained on")
        parser.add_argument("--report", help="CSV file for the per-SNR report")
        parser.add_argument("--split", help=f"Records to evaluate: {', '.join(SPLITS)} (default test)")

    def handle(self, *args, **options):
        checkpoint_path = self.option("checkpoint")
        dataset_path = self.option("dataset")
        if checkpoint_path is None or dataset_path is None:
            raise ConfigurationException("eval needs --checkpoint and --dataset")
        split_name = self.option("split", "test")
        if split_name not in SPLITS:
            raise ConfigurationException(f"Unknown split {split_name!r}; choose one of {', '.join(SPLITS)}")

        trained = load_trained(self.resolve_path(checkpoint_path))
        dataset = RadCharDataset(self.resolve_path(dataset_path))
        trained.check_dataset(dataset)

        indices = trained.split_indices(dataset, split_name)
        report = evaluate(trained.model, dataset, indices, trained.stats, trained.normalizer)

        self.render(snr_table(report), overall_table(report), confusion_table(report))
        report_path = self.option("report")
        if report_path:
            path = report_csv(report, self.resolve_path(report_path, create_parent=True))
            self.stdout.write(f"Report: {path}")
        self.stdout.write(self.style.SUCCESS(f"Evaluated {len(indices)} {split_name} records"))
