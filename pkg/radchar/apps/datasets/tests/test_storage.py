import json
import tempfile
from pathlib import Path

import numpy as np
from django.test import SimpleTestCase

from radchar.apps.core.exceptions import (
    DatasetConfigValidationError,
    DatasetFormatError,
    DatasetIOError,
    RecordIndexError,
)
from radchar.apps.datasets.config import FORMAT_VERSION, DatasetConfig
from radchar.apps.datasets.generation import generate
from radchar.apps.datasets.sampling import generate_record
from radchar.apps.datasets.storage import (
    HEADER,
    RECORD_DTYPE,
    RadCharDataset,
    expected_file_size,
    sidecar_path,
)


class FormatArithmeticTests(SimpleTestCase):
    def test_header_and_record_sizes(self):
        self.assertEqual(HEADER.size, 28)
        self.assertEqual(RECORD_DTYPE.itemsize, 8 + 4 + 16 + 512 * 2 * 4)


class GenerateTests(SimpleTestCase):
    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.addCleanup(self.tmp.cleanup)
        self.root = Path(self.tmp.name)

    def test_count_and_size(self):
        summary = generate(DatasetConfig(count=10, seed=1), self.root / "d.radc")
        self.assertEqual(summary.count, 10)
        self.assertEqual((self.root / "d.radc").stat().st_size, expected_file_size(10))
        dataset = RadCharDataset(self.root / "d.radc")
        self.assertEqual(len(dataset), 10)
        self.assertEqual(int(summary.class_histogram.sum()), 10)

    def test_regeneration_is_byte_identical(self):
        config = DatasetConfig(count=10, seed=7)
        generate(config, self.root / "a.radc")
        generate(config, self.root / "b.radc")
        self.assertEqual((self.root / "a.radc").read_bytes(), (self.root / "b.radc").read_bytes())
        self.assertEqual(
            sidecar_path(self.root / "a.radc").read_text(), sidecar_path(self.root / "b.radc").read_text()
        )

    def test_parallel_generation_matches_serial(self):
        config = DatasetConfig(count=10_000, seed=31)
        generate(config, self.root / "serial.radc", workers=1)
        generate(config, self.root / "parallel.radc", workers=8)
        self.assertEqual(
            (self.root / "serial.radc").read_bytes(), (self.root / "parallel.radc").read_bytes()
        )

    def test_block_size_does_not_change_output(self):
        config = DatasetConfig(count=50, seed=2)
        generate(config, self.root / "a.radc", chunk_size=7)
        generate(config, self.root / "b.radc", chunk_size=1024)
        self.assertEqual((self.root / "a.radc").read_bytes(), (self.root / "b.radc").read_bytes())

    def test_sidecar_contents(self):
        config = DatasetConfig(count=12, seed=5, snr_min=-2, snr_max=2)
        generate(config, self.root / "d.radc")
        metadata = json.loads(sidecar_path(self.root / "d.radc").read_text())
        self.assertEqual(metadata["format_version"], FORMAT_VERSION)
        self.assertEqual(metadata["seed"], 5)
        self.assertEqual(DatasetConfig.from_dict(metadata["config"]), config)
        self.assertEqual(metadata["fingerprint"], config.fingerprint())

    def test_invalid_config_writes_nothing(self):
        with self.assertRaises(DatasetConfigValidationError):
            generate(DatasetConfig(count=10, snr_min=5, snr_max=-5), self.root / "d.radc")
        self.assertFalse((self.root / "d.radc").exists())

    def test_invalid_worker_count(self):
        with self.assertRaises(DatasetConfigValidationError):
            generate(DatasetConfig(count=10), self.root / "d.radc", workers=0)


class RadCharDatasetTests(SimpleTestCase):
    @classmethod
    def setUpClass(cls):
        super().setUpClass()
        cls.tmp = tempfile.TemporaryDirectory()
        cls.path = Path(cls.tmp.name) / "d.radc"
        cls.config = DatasetConfig(count=40, seed=17)
        generate(cls.config, cls.path)
        cls.dataset = RadCharDataset(cls.path)

    @classmethod
    def tearDownClass(cls):
        del cls.dataset
        cls.tmp.cleanup()
        super().tearDownClass()

    def test_records_match_regeneration(self):
        for index in (0, 13, 39):
            stored = self.dataset.record(index)
            fresh = generate_record(self.config, index)
            self.assertEqual(stored.index, index)
            self.assertEqual(stored.params, fresh.params)
            np.testing.assert_array_equal(stored.frame.to_array(), fresh.frame.to_array(np.float32))

    def test_frames_layout(self):
        frames = self.dataset.frames([1, 2, 3])
        self.assertEqual(frames.shape, (3, 2, 512))
        self.assertEqual(frames.dtype, np.float32)
        np.testing.assert_array_equal(frames[1, 0], self.dataset.record(2).frame.i)

    def test_labels(self):
        labels = self.dataset.labels(np.arange(40))
        self.assertEqual(labels.regression.shape, (40, 4))
        params = self.dataset.params(5)
        self.assertEqual(labels.classes[5], int(params.signal_class))
        self.assertEqual(labels.regression[5, 0], params.n_p)
        self.assertEqual(labels.regression[5, 1], params.t_pw)

    def test_fingerprint_comes_from_sidecar(self):
        self.assertEqual(self.dataset.fingerprint, self.config.fingerprint())

    def test_index_out_of_range(self):
        with self.assertRaises(RecordIndexError):
            self.dataset.record(40)
        with self.assertRaises(RecordIndexError):
            self.dataset.record(-1)

    def test_iter_frames_covers_indices(self):
        chunks = list(self.dataset.iter_frames(np.arange(40), chunk_size=16))
        self.assertEqual([len(c) for c in chunks], [16, 16, 8])


class MalformedFileTests(SimpleTestCase):
    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.addCleanup(self.tmp.cleanup)
        self.root = Path(self.tmp.name)

    def test_missing_file(self):
        with self.assertRaises(DatasetIOError):
            RadCharDataset(self.root / "absent.radc")

    def test_wrong_magic(self):
        path = self.root / "bad.radc"
        path.write_bytes(HEADER.pack(b"NOPE", 1, 0, 512, 3.2e6))
        with self.assertRaises(DatasetFormatError):
            RadCharDataset(path)

    def test_truncated_file(self):
        generate(DatasetConfig(count=3, seed=0), self.root / "d.radc")
        data = (self.root / "d.radc").read_bytes()
        (self.root / "cut.radc").write_bytes(data[:-100])
        with self.assertRaises(DatasetFormatError):
            RadCharDataset(self.root / "cut.radc")

    def test_missing_sidecar_has_no_fingerprint(self):
        generate(DatasetConfig(count=3, seed=0), self.root / "d.radc")
        sidecar_path(self.root / "d.radc").unlink()
        dataset = RadCharDataset(self.root / "d.radc")
        self.assertEqual(len(dataset), 3)
        with self.assertRaises(DatasetFormatError):
            dataset.fingerprint
