import io
import tempfile
from pathlib import Path

import pandas as pd
from django.core.management import call_command
from django.core.management.base import CommandError
from django.test import SimpleTestCase, override_settings

from radchar.apps.core.exceptions import ExitCode
from radchar.apps.datasets.sampling import sample_params
from radchar.apps.datasets.storage import RadCharDataset, sidecar_path


class GenerateCommandTests(SimpleTestCase):
    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.addCleanup(self.tmp.cleanup)
        self.root = Path(self.tmp.name)

    def run_command(self, *args, **kwargs):
        out = io.StringIO()
        call_command("generate", *args, stdout=out, **kwargs)
        return out.getvalue()

    def test_generate_twice_is_identical(self):
        output = self.run_command("--count", "30", "--seed", "7", "--out", str(self.root / "a.radc"))
        self.run_command("--count", "30", "--seed", "7", "--out", str(self.root / "b.radc"))
        self.assertEqual((self.root / "a.radc").read_bytes(), (self.root / "b.radc").read_bytes())
        self.assertIn("Generated 30 records", output)
        self.assertIn("Polyphase Barker", output)
        self.assertIn("File size", output)
        self.assertTrue(sidecar_path(self.root / "a.radc").exists())

    def test_inverted_snr_window_is_a_usage_error(self):
        with self.assertRaises(CommandError) as ctx:
            self.run_command("--count", "10", "--snr-min", "5", "--snr-max", "-5", "--out", str(self.root / "d.radc"))
        self.assertEqual(ctx.exception.returncode, ExitCode.USAGE)
        self.assertIn("snr_min", str(ctx.exception))

    def test_config_file_supplies_defaults_and_flags_win(self):
        config = self.root / "gen.yaml"
        config.write_text("count: 12\nseed: 3\nsnr-min: 0\nsnr_max: 4\n")
        self.run_command("--config", str(config), "--seed", "5", "--out", str(self.root / "d.radc"))
        dataset = RadCharDataset(self.root / "d.radc")
        self.assertEqual(len(dataset), 12)
        self.assertEqual(dataset.config.seed, 5)
        low, high = dataset.snr_span()
        self.assertGreaterEqual(low, 0)
        self.assertLessEqual(high, 4)

    def test_unknown_config_key(self):
        config = self.root / "gen.yaml"
        config.write_text("cuont: 12\n")
        with self.assertRaises(CommandError) as ctx:
            self.run_command("--config", str(config), "--out", str(self.root / "d.radc"))
        self.assertEqual(ctx.exception.returncode, ExitCode.USAGE)

    def test_missing_config_file_is_an_io_error(self):
        with self.assertRaises(CommandError) as ctx:
            self.run_command("--config", str(self.root / "absent.yaml"))
        self.assertEqual(ctx.exception.returncode, ExitCode.IO)

    def test_bare_file_name_resolves_against_data_dir(self):
        with override_settings(RADCHAR_DATA_DIR=self.root / "data"):
            self.run_command("--count", "10", "--out", "bare.radc")
        self.assertTrue((self.root / "data" / "bare.radc").exists())

    def test_default_count_comes_from_settings(self):
        with override_settings(RADCHAR_DEFAULT_COUNT=11):
            self.run_command("--out", str(self.root / "d.radc"))
        self.assertEqual(len(RadCharDataset(self.root / "d.radc")), 11)


class InspectCommandTests(SimpleTestCase):
    @classmethod
    def setUpClass(cls):
        super().setUpClass()
        cls.tmp = tempfile.TemporaryDirectory()
        cls.path = Path(cls.tmp.name) / "d.radc"
        call_command("generate", "--count", "15", "--seed", "21", "--out", str(cls.path), stdout=io.StringIO())

    @classmethod
    def tearDownClass(cls):
        cls.tmp.cleanup()
        super().tearDownClass()

    def test_prints_params_matching_regeneration(self):
        out = io.StringIO()
        call_command("inspect", "--dataset", str(self.path), "--index", "4", stdout=out)
        params = sample_params(21, 4)
        self.assertIn(params.signal_class.label, out.getvalue())
        self.assertIn(f"{params.t_pw * 1e6:.4f} us", out.getvalue())
        self.assertIn("match", out.getvalue())
        self.assertNotIn("MISMATCH", out.getvalue())

    def test_dump_csv_has_one_row_per_sample(self):
        dump = Path(self.tmp.name) / "frame.csv"
        call_command("inspect", "--dataset", str(self.path), "--index", "0", "--dump-csv", str(dump),
                     stdout=io.StringIO())
        frame = pd.read_csv(dump)
        self.assertEqual(list(frame.columns), ["t_us", "i", "q"])
        self.assertEqual(len(frame), 512)
        self.assertAlmostEqual(frame["t_us"].iloc[1], 1 / 3.2)

    def test_index_beyond_count(self):
        with self.assertRaises(CommandError) as ctx:
            call_command("inspect", "--dataset", str(self.path), "--index", "15", stdout=io.StringIO())
        self.assertNotEqual(ctx.exception.returncode, 0)

    def test_missing_dataset(self):
        with self.assertRaises(CommandError) as ctx:
            call_command("inspect", "--dataset", str(Path(self.tmp.name) / "nope.radc"), "--index", "0",
                         stdout=io.StringIO())
        self.assertEqual(ctx.exception.returncode, ExitCode.IO)
