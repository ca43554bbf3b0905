import threading

import numpy as np
from django.test import SimpleTestCase

from radchar.apps.core.exceptions import AutogradError, NonFiniteTensorError, ShapeError
from radchar.apps.nn.tensor import Tensor, concat, is_grad_enabled, no_grad


class TensorBasicsTests(SimpleTestCase):
    def test_default_dtype_is_float32(self):
        self.assertEqual(Tensor([1, 2, 3]).dtype, np.float32)
        self.assertEqual(Tensor(np.zeros(3)).dtype, np.float64)
        self.assertEqual(Tensor([1.0], dtype=np.float64).dtype, np.float64)

    def test_scalar_operands_keep_dtype(self):
        x = Tensor(np.ones(3, dtype=np.float32))
        self.assertEqual((x * 2.5 + 1).dtype, np.float32)
        self.assertEqual((1.0 - x).dtype, np.float32)

    def test_item_requires_single_value(self):
        self.assertEqual(Tensor([4.0]).item(), 4.0)
        with self.assertRaises(ShapeError):
            Tensor([1.0, 2.0]).item()


class BackwardTests(SimpleTestCase):
    def test_sum_gradient_is_ones(self):
        x = Tensor([1.0, -2.0, 3.0], requires_grad=True)
        x.sum().backward()
        np.testing.assert_array_equal(x.grad, np.ones(3, dtype=np.float32))

    def test_sum_of_squares(self):
        x = Tensor([1.0, 2.0], requires_grad=True)
        (x * x).sum().backward()
        np.testing.assert_array_equal(x.grad, [2.0, 4.0])

    def test_shared_subexpression_accumulates(self):
        x = Tensor([3.0], requires_grad=True)
        (x * x + x).sum().backward()
        np.testing.assert_allclose(x.grad, [7.0])

    def test_broadcast_gradient_is_reduced(self):
        a = Tensor(np.ones((2, 3)), requires_grad=True)
        b = Tensor(np.arange(3.0), requires_grad=True)
        (a + b).sum().backward()
        np.testing.assert_array_equal(b.grad, [2.0, 2.0, 2.0])
        np.testing.assert_array_equal(a.grad, np.ones((2, 3)))

    def test_repeated_index_gradient(self):
        x = Tensor(np.array([1.0, 2.0, 3.0]), requires_grad=True)
        x[np.array([0, 0, 1])].sum().backward()
        np.testing.assert_array_equal(x.grad, [2.0, 1.0, 0.0])

    def test_concat_splits_gradient(self):
        a = Tensor(np.ones((1, 2)), requires_grad=True)
        b = Tensor(np.ones((1, 3)), requires_grad=True)
        weights = np.arange(5.0).reshape(1, 5)
        (concat([a, b], axis=1) * weights).sum().backward()
        np.testing.assert_array_equal(a.grad, [[0.0, 1.0]])
        np.testing.assert_array_equal(b.grad, [[2.0, 3.0, 4.0]])

    def test_gradients_accumulate_across_calls(self):
        x = Tensor([1.0], requires_grad=True)
        (x * 2).sum().backward()
        (x * 3).sum().backward()
        np.testing.assert_array_equal(x.grad, [5.0])

    def test_backward_without_graph(self):
        with self.assertRaises(AutogradError):
            Tensor([1.0], requires_grad=True).backward()

    def test_backward_on_non_scalar_needs_grad(self):
        x = Tensor([1.0, 2.0], requires_grad=True)
        with self.assertRaises(AutogradError):
            (x * 2).backward()

    def test_no_grad_records_nothing(self):
        x = Tensor([1.0], requires_grad=True)
        with no_grad():
            y = x * 2
        self.assertFalse(y.requires_grad)
        with self.assertRaises(AutogradError):
            y.backward()
        self.assertTrue(is_grad_enabled())

    def test_no_grad_is_private_to_each_thread(self):
        x = Tensor([1.0], requires_grad=True)
        a_in, b_in, a_out = threading.Event(), threading.Event(), threading.Event()
        seen = {}

        def first():
            with no_grad():
                a_in.set()
                b_in.wait(5)
            a_out.set()

        def second():
            a_in.wait(5)
            with no_grad():
                b_in.set()
                a_out.wait(5)
                seen["after_first_exit"] = (x * 2).requires_grad
            seen["after_own_exit"] = (x * 2).requires_grad

        threads = [threading.Thread(target=first), threading.Thread(target=second)]
        for thread in threads:
            thread.start()
        a_in.wait(5)
        self.assertTrue((x * 2).requires_grad)
        for thread in threads:
            thread.join(5)

        self.assertEqual(seen, {"after_first_exit": False, "after_own_exit": True})
        self.assertTrue(is_grad_enabled())
        (x * 3).sum().backward()
        np.testing.assert_allclose(x.grad, [3.0])


class OpErrorTests(SimpleTestCase):
    def test_broadcast_mismatch_reports_shapes(self):
        with self.assertRaises(ShapeError) as ctx:
            Tensor(np.ones((2, 3))) + Tensor(np.ones(4))
        self.assertIn("(2, 3)", str(ctx.exception))
        self.assertIn("(4,)", str(ctx.exception))

    def test_matmul_mismatch(self):
        with self.assertRaises(ShapeError):
            Tensor(np.ones((2, 3))) @ Tensor(np.ones((4, 2)))

    def test_non_finite_output_is_an_error(self):
        with np.errstate(divide="ignore"):
            with self.assertRaises(NonFiniteTensorError):
                Tensor([0.0]).log()

    def test_finiteness_check_can_be_disabled(self):
        previous = Tensor.check_finite
        Tensor.check_finite = False
        try:
            with np.errstate(divide="ignore"):
                out = Tensor([0.0]).log()
            self.assertTrue(np.isneginf(out.data[0]))
        finally:
            Tensor.check_finite = previous


class KernelTests(SimpleTestCase):
    def test_softmax_rows_sum_to_one(self):
        rng = np.random.default_rng(1)
        probs = Tensor(rng.normal(scale=10.0, size=(32, 5)).astype(np.float32)).softmax(axis=-1)
        np.testing.assert_allclose(probs.data.sum(axis=-1), 1.0, atol=1e-6)

    def test_log_softmax_matches_log_of_softmax(self):
        logits = Tensor(np.random.default_rng(2).normal(size=(4, 6)))
        np.testing.assert_allclose(logits.log_softmax().data, np.log(logits.softmax().data), atol=1e-12)

    def test_conv1d_matches_correlation(self):
        from radchar.apps.nn.tensor import Conv1d

        rng = np.random.default_rng(3)
        x = rng.normal(size=(1, 1, 20))
        w = rng.normal(size=(1, 1, 4))
        out = Conv1d.apply(Tensor(x), Tensor(w))
        np.testing.assert_allclose(out.data[0, 0], np.correlate(x[0, 0], w[0, 0], mode="valid"))

    def test_conv1d_stride(self):
        from radchar.apps.nn.tensor import Conv1d

        x = np.arange(10.0).reshape(1, 1, 10)
        w = np.ones((1, 1, 2))
        out = Conv1d.apply(Tensor(x), Tensor(w), stride=3)
        np.testing.assert_array_equal(out.data[0, 0], [1.0, 7.0, 13.0])

    def test_maxpool_drops_ragged_tail(self):
        from radchar.apps.nn.tensor import MaxPool1d

        x = Tensor(np.array([[[1.0, 5.0, 2.0, 0.0, 9.0]]]), requires_grad=True)
        out = MaxPool1d.apply(x, kernel=2)
        np.testing.assert_array_equal(out.data, [[[5.0, 2.0]]])
        out.sum().backward()
        np.testing.assert_array_equal(x.grad, [[[0.0, 1.0, 1.0, 0.0, 0.0]]])

    def test_maxpool2d(self):
        from radchar.apps.nn.tensor import MaxPool2d

        x = np.arange(25.0).reshape(1, 1, 5, 5)
        out = MaxPool2d.apply(Tensor(x), kernel=2)
        np.testing.assert_array_equal(out.data[0, 0], [[6.0, 8.0], [16.0, 18.0]])


class GradcheckTests(SimpleTestCase):
    def test_flags_a_wrong_backward(self):
        from radchar.apps.nn.gradcheck import gradcheck
        from radchar.apps.nn.tensor import Function

        class HalfSquare(Function):
            @staticmethod
            def forward(ctx, a):
                ctx.save(a)
                return a * a

            @staticmethod
            def backward(ctx, grad):
                (a,) = ctx.saved
                return grad * a

        x = Tensor(np.random.default_rng(0).normal(size=5), requires_grad=True)
        self.assertGreater(gradcheck(lambda: HalfSquare.apply(x).sum(), [x]), 0.1)
        self.assertLess(gradcheck(lambda: (x * x).sum(), [x]), 1e-8)

    def test_flags_one_wrong_small_coordinate(self):
        from radchar.apps.nn.gradcheck import gradcheck
        from radchar.apps.nn.tensor import Function

        class SkewedSquare(Function):
            @staticmethod
            def forward(ctx, a):
                ctx.save(a)
                return a * a

            @staticmethod
            def backward(ctx, grad):
                (a,) = ctx.saved
                out = grad * 2.0 * a
                out[0] *= 1.5
                return out

        values = np.random.default_rng(1).normal(size=50)
        values[0] = 1e-4
        x = Tensor(values, requires_grad=True)
        self.assertGreater(gradcheck(lambda: SkewedSquare.apply(x).sum(), [x], max_entries=None), 0.3)

    def test_ignores_roundoff_on_zero_gradients(self):
        from radchar.apps.nn.gradcheck import gradcheck

        x = Tensor(np.random.default_rng(2).normal(size=6), requires_grad=True)
        shift = Tensor(np.array([0.7]), requires_grad=True)
        # The mean removes any constant shift, so d/dshift is exactly zero.
        self.assertLess(gradcheck(lambda: ((x + shift - (x + shift).mean()) ** 2).sum(), [x, shift]), 1e-6)
