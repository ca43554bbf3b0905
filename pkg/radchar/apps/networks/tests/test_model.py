import numpy as np
from django.test import SimpleTestCase

from radchar.apps.core.exceptions import ModelConfigValidationError, ShapeError
from radchar.apps.networks.backbones import sinusoidal_positions
from radchar.apps.networks.config import BackboneKind, ModelConfig
from radchar.apps.networks.model import LABEL_NAMES, MTLModel, build_model
from radchar.apps.nn.gradcheck import gradcheck
from radchar.apps.nn.losses import cross_entropy, l1_loss
from radchar.apps.nn.tensor import Tensor, no_grad


def _batch(size, seed=0, dtype=np.float32):
    return Tensor(np.random.default_rng(seed).normal(size=(size, 2, 512)).astype(dtype))


def _tiny_transformer(**overrides):
    options = dict(
        backbone="iqst-s", d_model=16, num_layers=1, encoder_dropout=0.0,
        backbone_dropout=0.0, head_conv_dropout=0.0, head_dense_dropout=0.0,
    )
    options.update(overrides)
    return ModelConfig(**options)


class ModelConfigTests(SimpleTestCase):
    def test_variant_defaults(self):
        small = ModelConfig(backbone="iqst-s")
        large = ModelConfig(backbone="iqst-l")
        self.assertEqual((small.heads, small.layers), (3, 3))
        self.assertEqual((large.heads, large.layers), (9, 6))
        self.assertEqual(small.attention_head_dim, 128)
        self.assertEqual(small.feed_forward_dim, 512)

    def test_unknown_backbone(self):
        with self.assertRaises(ModelConfigValidationError):
            ModelConfig(backbone="resnet")

    def test_conv_depth_is_bounded(self):
        with self.assertRaises(ModelConfigValidationError):
            ModelConfig(backbone="cnn2d", conv_layers=5).validate()

    def test_dropout_bounds(self):
        with self.assertRaises(ModelConfigValidationError):
            ModelConfig(head_dense_dropout=1.0).validate()

    def test_dict_round_trip(self):
        config = ModelConfig(backbone="cnn1d", conv_layers=2, d_model=64)
        data = config.to_dict()
        self.assertEqual(data["backbone"], "cnn1d")
        self.assertEqual(ModelConfig.from_dict(data), config)

    def test_unknown_keys(self):
        with self.assertRaises(ModelConfigValidationError):
            ModelConfig.from_dict({"backbone": "cnn1d", "width": 3})


class BackboneShapeTests(SimpleTestCase):
    def test_feature_shapes(self):
        expected = {
            BackboneKind.CNN2D: (8, 15, 15),
            BackboneKind.CNN1D: (8, 255),
            BackboneKind.IQST_S: (128,),
            BackboneKind.IQST_L: (128,),
        }
        for kind, shape in expected.items():
            with self.subTest(kind=kind):
                self.assertEqual(MTLModel(ModelConfig(backbone=kind)).feature_shape, shape)

    def test_deeper_convolution(self):
        self.assertEqual(MTLModel(ModelConfig(backbone="cnn2d", conv_layers=2)).feature_shape, (8, 7, 7))
        self.assertEqual(MTLModel(ModelConfig(backbone="cnn1d", conv_layers=3)).feature_shape, (8, 63))

    def test_head_widths(self):
        shapes = MTLModel(ModelConfig(backbone="cnn1d")).output_shape()
        self.assertEqual(shapes["class"], (5,))
        for name in LABEL_NAMES:
            self.assertEqual(shapes[name], (1,))

    def test_every_backbone_runs_end_to_end(self):
        for kind in BackboneKind:
            with self.subTest(kind=kind):
                model = build_model(ModelConfig(backbone=kind), seed=0)
                outputs = model(_batch(2))
                self.assertEqual(outputs.class_logits.shape, (2, 5))
                self.assertEqual(outputs.reg.shape, (2, 4))

    def test_full_batch(self):
        outputs = build_model(ModelConfig(backbone="cnn1d")).eval()(_batch(64))
        self.assertEqual(outputs.class_logits.shape, (64, 5))
        self.assertEqual(outputs.reg.shape, (64, 4))
        np.testing.assert_allclose(outputs.class_probabilities().sum(axis=1), 1.0, atol=1e-6)

    def test_wrong_input_shape(self):
        model = build_model(ModelConfig(backbone="cnn2d"))
        with self.assertRaises(ShapeError):
            model(Tensor(np.zeros((1, 2, 256), dtype=np.float32)))

    def test_positions_table(self):
        table = sinusoidal_positions(9, 6)
        self.assertEqual(table.shape, (9, 6))
        np.testing.assert_allclose(table[0], [0.0, 1.0, 0.0, 1.0, 0.0, 1.0])
        self.assertAlmostEqual(float(table[1, 0]), np.sin(1.0), places=6)


class ModelBehaviourTests(SimpleTestCase):
    def test_eval_is_deterministic(self):
        model = build_model(ModelConfig(backbone="iqst-s", d_model=32), seed=3).eval()
        x = _batch(4)
        with no_grad():
            first, second = model(x), model(x)
        np.testing.assert_array_equal(first.class_logits.data, second.class_logits.data)
        np.testing.assert_array_equal(first.reg.data, second.reg.data)

    def test_single_sample_batch(self):
        for kind in ("cnn2d", "iqst-s"):
            with self.subTest(kind=kind):
                outputs = build_model(ModelConfig(backbone=kind, d_model=32)).eval()(_batch(1))
                self.assertEqual(outputs.reg.shape, (1, 4))

    def test_seed_fixes_initial_weights(self):
        first = build_model(ModelConfig(backbone="cnn1d"), seed=9)
        second = build_model(ModelConfig(backbone="cnn1d"), seed=9)
        for a, b in zip(first.parameters(), second.parameters()):
            np.testing.assert_array_equal(a.data, b.data)

    def test_parameter_count_ordering(self):
        counts = {kind: MTLModel(ModelConfig(backbone=kind)).backbone_parameter_count() for kind in BackboneKind}
        self.assertGreater(counts[BackboneKind.IQST_L], counts[BackboneKind.IQST_S])
        self.assertGreater(counts[BackboneKind.IQST_S], counts[BackboneKind.CNN1D])
        self.assertGreater(counts[BackboneKind.IQST_S], counts[BackboneKind.CNN2D])

    def test_head_changes_leave_shared_features(self):
        model = build_model(ModelConfig(backbone="cnn1d")).eval()
        x = _batch(3)
        before = model.features(x).data.copy()
        for param in model.heads["t_pri"].parameters():
            param.data = param.data + 1.0
        np.testing.assert_array_equal(model.features(x).data, before)


class SharedGradientTests(SimpleTestCase):
    def _task_losses(self, model, x, labels, targets):
        outputs = model(x)
        losses = {"class": cross_entropy(outputs.class_logits, labels)}
        for column, name in enumerate(LABEL_NAMES):
            losses[name] = l1_loss(outputs.reg[:, column], targets[:, column])
        return losses

    def test_backbone_gradient_is_sum_of_head_gradients(self):
        model = build_model(_tiny_transformer(), seed=1).astype(np.float64)
        rng = np.random.default_rng(2)
        x = _batch(4, seed=5, dtype=np.float64)
        labels = rng.integers(0, 5, size=4)
        targets = rng.random((4, 4))

        model.zero_grad()
        losses = self._task_losses(model, x, labels, targets)
        total = losses["class"]
        for name in LABEL_NAMES:
            total = total + losses[name]
        total.backward()
        joint = {name: p.grad.copy() for name, p in model.backbone.named_parameters()}

        summed = {name: np.zeros_like(g) for name, g in joint.items()}
        for task in ("class",) + LABEL_NAMES:
            model.zero_grad()
            self._task_losses(model, x, labels, targets)[task].backward()
            for name, param in model.backbone.named_parameters():
                summed[name] += param.grad

        for name in joint:
            np.testing.assert_allclose(joint[name], summed[name], rtol=1e-9, atol=1e-12, err_msg=name)

    def test_reduced_transformer_gradients(self):
        model = build_model(_tiny_transformer(), seed=4).astype(np.float64)
        rng = np.random.default_rng(6)
        x = _batch(4, seed=7, dtype=np.float64)
        labels = rng.integers(0, 5, size=4)
        targets = rng.random((4, 4))

        def loss():
            outputs = model(x)
            return cross_entropy(outputs.class_logits, labels) + l1_loss(outputs.reg, targets)

        error = gradcheck(loss, list(model.parameters()), max_entries=8, rng=rng)
        self.assertLess(error, 1e-3)
