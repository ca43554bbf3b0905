from django.test import SimpleTestCase

from radchar.apps.core.exceptions import ConfigurationException, ValidationException
from radchar.apps.networks.config import ModelConfig
from radchar.apps.training.config import WEIGHT_NAMES, TaskWeights, TrainConfig


class TaskWeightsTests(SimpleTestCase):
    def test_defaults(self):
        weights = TaskWeights()
        self.assertEqual(weights.as_tuple(), (0.1, 0.225, 0.225, 0.225, 0.225))
        self.assertAlmostEqual(sum(weights.as_tuple()), 1.0)
        self.assertEqual(tuple(weights.as_dict()), WEIGHT_NAMES)

    def test_parse_comma_string(self):
        weights = TaskWeights.parse("1, 0, 0.5, 0.5, 0")
        self.assertEqual(weights.as_tuple(), (1.0, 0.0, 0.5, 0.5, 0.0))
        self.assertIs(TaskWeights.parse(weights), weights)
        self.assertEqual(TaskWeights.parse([0.2] * 5).w_td, 0.2)

    def test_parse_needs_five_numbers(self):
        with self.assertRaises(ConfigurationException):
            TaskWeights.parse("0.5,0.5")
        with self.assertRaises(ConfigurationException):
            TaskWeights.parse("a,b,c,d,e")

    def test_negative_or_all_zero_weights(self):
        self.assertFalse(TaskWeights(-0.1).check())
        self.assertFalse(TaskWeights(0, 0, 0, 0, 0).check())
        self.assertTrue(TaskWeights(1, 0, 0, 0, 0).check())


class TrainConfigTests(SimpleTestCase):
    def test_defaults(self):
        config = TrainConfig()
        self.assertEqual((config.epochs, config.lr, config.batch_size), (100, 5e-4, 64))
        self.assertEqual(config.model.backbone.value, "iqst-s")

    def test_invalid_hyperparameters(self):
        with self.assertRaises(ValidationException) as ctx:
            TrainConfig(epochs=0, lr=-1.0, batch_size=0).validate()
        fields = {detail.field for detail in ctx.exception.details}
        self.assertTrue({"epochs", "lr", "batch_size"} <= fields)

    def test_dict_round_trip(self):
        config = TrainConfig(epochs=3, seed=9, subset=50, weights=TaskWeights(1, 0, 0, 0, 0),
                             model=ModelConfig(backbone="cnn2d", conv_layers=2))
        self.assertEqual(TrainConfig.from_dict(config.to_dict()), config)

    def test_hash_tracks_every_setting(self):
        base = TrainConfig()
        self.assertEqual(base.config_hash(), TrainConfig().config_hash())
        self.assertNotEqual(base.config_hash(), TrainConfig(lr=1e-3).config_hash())
        self.assertNotEqual(base.config_hash(), TrainConfig(model=ModelConfig(d_model=64)).config_hash())

    def test_shuffle_stream_depends_on_seed(self):
        a = TrainConfig(seed=1).shuffle_rng().permutation(20)
        b = TrainConfig(seed=1).shuffle_rng().permutation(20)
        c = TrainConfig(seed=2).shuffle_rng().permutation(20)
        self.assertEqual(a.tolist(), b.tolist())
        self.assertNotEqual(a.tolist(), c.tolist())
