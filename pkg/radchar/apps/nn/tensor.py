"""
Dense tensors with tape-based reverse-mode automatic differentiation.

Every differentiable operation is a ``Function`` subclass with a static
``forward`` working on numpy arrays and a static ``backward`` returning one
gradient per tensor input. ``Function.apply`` records the inputs on the
output tensor; ``Tensor.backward`` walks that record in reverse
topological order.
"""

import logging
import math
from contextlib import contextmanager
from contextvars import ContextVar
from typing import Iterator, Optional, Sequence, Tuple

import numpy as np
from scipy import special

from radchar.apps.core.exceptions import AutogradError, ErrorDetail, NonFiniteTensorError, ShapeError

logger = logging.getLogger(__name__)

DEFAULT_DTYPE = np.float32

# Graph recording flag, private to each thread and asyncio task.
_grad_enabled: ContextVar[bool] = ContextVar("radchar_grad_enabled", default=True)


def unbroadcast(grad: np.ndarray, shape: Tuple[int, ...]) -> np.ndarray:
    """Sum ``grad`` over the axes that broadcasting expanded to reach ``shape``."""
    if grad.shape == tuple(shape):
        return grad
    extra = grad.ndim - len(shape)
    if extra > 0:
        grad = grad.sum(axis=tuple(range(extra)))
    axes = tuple(i for i, n in enumerate(shape) if n == 1 and grad.shape[i] != 1)
    if axes:
        grad = grad.sum(axis=axes, keepdims=True)
    return grad.reshape(shape)


def _normalize_axes(axis, ndim: int) -> Tuple[int, ...]:
    if axis is None:
        return tuple(range(ndim))
    if isinstance(axis, int):
        axis = (axis,)
    return tuple(sorted(a % ndim for a in axis))


class Context:
    """Scratch space shared by one forward call and its backward call."""

    __slots__ = ("saved", "attrs")

    def __init__(self):
        self.saved: Tuple = ()
        self.attrs: dict = {}

    def save(self, *values) -> None:
        self.saved = values


class Tensor:
    """
    N-dimensional array that can record how it was computed.

    Float arrays keep their dtype; everything else becomes float32.
    """

    __slots__ = ("data", "grad", "requires_grad", "_ctx")

    check_finite = True

    def __init__(self, data, requires_grad: bool = False, dtype=None):
        if isinstance(data, Tensor):
            data = data.data
        if dtype is not None:
            array = np.asarray(data, dtype=dtype)
        else:
            array = np.asarray(data)
            if not (isinstance(data, np.ndarray) and np.issubdtype(array.dtype, np.floating)):
                array = array.astype(DEFAULT_DTYPE)
        self.data: np.ndarray = array
        self.grad: Optional[np.ndarray] = None
        self.requires_grad = requires_grad
        self._ctx = None

    def __repr__(self) -> str:
        suffix = f", grad_fn={self._ctx[0].__name__}" if self._ctx is not None else ""
        return f"Tensor(shape={self.shape}, dtype={self.dtype}{suffix})"

    # Introspection

    @property
    def shape(self) -> Tuple[int, ...]:
        return self.data.shape

    @property
    def ndim(self) -> int:
        return self.data.ndim

    @property
    def dtype(self):
        return self.data.dtype

    @property
    def size(self) -> int:
        return self.data.size

    def __len__(self) -> int:
        return len(self.data)

    def numpy(self) -> np.ndarray:
        return self.data

    def item(self) -> float:
        if self.data.size != 1:
            raise ShapeError(f"item() needs a single value, tensor has shape {self.shape}")
        return float(self.data.reshape(()))

    def detach(self) -> "Tensor":
        return Tensor(self.data)

    # Arithmetic

    def _lift(self, other) -> "Tensor":
        if isinstance(other, Tensor):
            return other
        return Tensor(np.asarray(other, dtype=self.data.dtype))

    def __add__(self, other):
        return Add.apply(self, self._lift(other))

    def __radd__(self, other):
        return Add.apply(self._lift(other), self)

    def __sub__(self, other):
        return Sub.apply(self, self._lift(other))

    def __rsub__(self, other):
        return Sub.apply(self._lift(other), self)

    def __mul__(self, other):
        return Mul.apply(self, self._lift(other))

    def __rmul__(self, other):
        return Mul.apply(self._lift(other), self)

    def __truediv__(self, other):
        return Div.apply(self, self._lift(other))

    def __rtruediv__(self, other):
        return Div.apply(self._lift(other), self)

    def __neg__(self):
        return Neg.apply(self)

    def __pow__(self, exponent: float):
        if isinstance(exponent, Tensor):
            raise AutogradError("Only scalar exponents are supported")
        return Pow.apply(self, exponent=float(exponent))

    def __matmul__(self, other):
        return MatMul.apply(self, self._lift(other))

    def __getitem__(self, index):
        return GetItem.apply(self, index=index)

    # Elementwise

    def exp(self):
        return Exp.apply(self)

    def log(self):
        return Log.apply(self)

    def abs(self):
        return Abs.apply(self)

    def sqrt(self):
        return Pow.apply(self, exponent=0.5)

    def relu(self):
        return ReLU.apply(self)

    def gelu(self):
        return GELU.apply(self)

    # Reductions and normalisations

    def sum(self, axis=None, keepdims: bool = False):
        return Sum.apply(self, axis=axis, keepdims=keepdims)

    def mean(self, axis=None, keepdims: bool = False):
        return Mean.apply(self, axis=axis, keepdims=keepdims)

    def var(self, axis=None, keepdims: bool = False):
        """Biased variance."""
        centred = self - self.mean(axis=axis, keepdims=True)
        return (centred * centred).mean(axis=axis, keepdims=keepdims)

    def softmax(self, axis: int = -1):
        return Softmax.apply(self, axis=axis)

    def log_softmax(self, axis: int = -1):
        return LogSoftmax.apply(self, axis=axis)

    # Shape

    def reshape(self, *shape):
        if len(shape) == 1 and isinstance(shape[0], (tuple, list)):
            shape = tuple(shape[0])
        return Reshape.apply(self, shape=shape)

    def transpose(self, *axes):
        if len(axes) == 1 and isinstance(axes[0], (tuple, list)):
            axes = tuple(axes[0])
        if not axes:
            axes = tuple(reversed(range(self.ndim)))
        return Transpose.apply(self, axes=axes)

    def broadcast_to(self, shape):
        return BroadcastTo.apply(self, shape=tuple(shape))

    def flatten(self, start: int = 1):
        return self.reshape(self.shape[:start] + (-1,))

    # Autograd

    def zero_grad(self) -> None:
        self.grad = np.zeros_like(self.data)

    def _topological_order(self) -> Iterator["Tensor"]:
        order, visited = [], set()
        stack = [(self, False)]
        while stack:
            node, expanded = stack.pop()
            if expanded:
                order.append(node)
                continue
            if id(node) in visited:
                continue
            visited.add(id(node))
            stack.append((node, True))
            if node._ctx is not None:
                for parent in node._ctx[2]:
                    if parent.requires_grad and id(parent) not in visited:
                        stack.append((parent, False))
        return reversed(order)

    def backward(self, grad: Optional[np.ndarray] = None) -> None:
        """
        Accumulate d(self)/d(leaf) into the ``grad`` of every leaf that
        requires gradients.

        Raises:
            AutogradError: The tensor was not produced by a recorded
                computation, or it is not a scalar and no ``grad`` was given.
        """
        if self._ctx is None:
            raise AutogradError(
                "backward() called on a tensor with no recorded computation",
                details=[ErrorDetail(message="run a forward pass with grad enabled first", code="no_graph")],
            )
        if grad is None:
            if self.data.size != 1:
                raise AutogradError(f"backward() without grad needs a scalar, got shape {self.shape}")
            grad = np.ones_like(self.data)

        grads = {id(self): np.asarray(grad, dtype=self.data.dtype)}
        for node in self._topological_order():
            node_grad = grads.pop(id(node), None)
            if node_grad is None:
                continue
            if node._ctx is None:
                node.grad = node_grad.copy() if node.grad is None else node.grad + node_grad
                continue

            function, ctx, parents = node._ctx
            parent_grads = function.backward(ctx, node_grad)
            if not isinstance(parent_grads, tuple):
                parent_grads = (parent_grads,)
            for parent, parent_grad in zip(parents, parent_grads):
                if parent_grad is None or not parent.requires_grad:
                    continue
                parent_grad = unbroadcast(np.asarray(parent_grad), parent.shape).astype(parent.dtype, copy=False)
                key = id(parent)
                grads[key] = parent_grad if key not in grads else grads[key] + parent_grad


def is_grad_enabled() -> bool:
    return _grad_enabled.get()


@contextmanager
def no_grad():
    """Disable graph recording inside the block, for the calling thread only."""
    token = _grad_enabled.set(False)
    try:
        yield
    finally:
        _grad_enabled.reset(token)


def concat(tensors: Sequence[Tensor], axis: int = 0) -> Tensor:
    return Concat.apply(*tensors, axis=axis)


class Function:
    """Base class of differentiable operations."""

    @classmethod
    def apply(cls, *inputs: Tensor, **kwargs) -> Tensor:
        ctx = Context()
        try:
            out = cls.forward(ctx, *(t.data for t in inputs), **kwargs)
        except ValueError as exc:
            raise ShapeError(
                f"{cls.__name__}: incompatible shapes {[t.shape for t in inputs]}",
                details=[ErrorDetail(message=str(exc), code="shape", context={"shapes": [t.shape for t in inputs]})],
            ) from exc

        out = np.asarray(out)
        if Tensor.check_finite and not np.all(np.isfinite(out)):
            raise NonFiniteTensorError(
                f"{cls.__name__} produced NaN or Inf",
                details=[ErrorDetail(message="non-finite output", code="non_finite",
                                     context={"op": cls.__name__, "shape": out.shape})],
            )

        result = Tensor(out)
        if is_grad_enabled() and any(t.requires_grad for t in inputs):
            result.requires_grad = True
            result._ctx = (cls, ctx, inputs)
        return result

    @staticmethod
    def forward(ctx: Context, *arrays, **kwargs) -> np.ndarray:
        raise NotImplementedError

    @staticmethod
    def backward(ctx: Context, grad: np.ndarray):
        raise NotImplementedError


class Add(Function):
    @staticmethod
    def forward(ctx, a, b):
        return a + b

    @staticmethod
    def backward(ctx, grad):
        return grad, grad


class Sub(Function):
    @staticmethod
    def forward(ctx, a, b):
        return a - b

    @staticmethod
    def backward(ctx, grad):
        return grad, -grad


class Mul(Function):
    @staticmethod
    def forward(ctx, a, b):
        ctx.save(a, b)
        return a * b

    @staticmethod
    def backward(ctx, grad):
        a, b = ctx.saved
        return grad * b, grad * a


class Div(Function):
    @staticmethod
    def forward(ctx, a, b):
        ctx.save(a, b)
        return a / b

    @staticmethod
    def backward(ctx, grad):
        a, b = ctx.saved
        return grad / b, -grad * a / (b * b)


class Neg(Function):
    @staticmethod
    def forward(ctx, a):
        return -a

    @staticmethod
    def backward(ctx, grad):
        return -grad


class Pow(Function):
    @staticmethod
    def forward(ctx, a, exponent):
        ctx.save(a)
        ctx.attrs["exponent"] = exponent
        return a ** a.dtype.type(exponent)

    @staticmethod
    def backward(ctx, grad):
        (a,) = ctx.saved
        exponent = a.dtype.type(ctx.attrs["exponent"])
        return grad * exponent * a ** (exponent - 1)


class Exp(Function):
    @staticmethod
    def forward(ctx, a):
        out = np.exp(a)
        ctx.save(out)
        return out

    @staticmethod
    def backward(ctx, grad):
        (out,) = ctx.saved
        return grad * out


class Log(Function):
    @staticmethod
    def forward(ctx, a):
        ctx.save(a)
        return np.log(a)

    @staticmethod
    def backward(ctx, grad):
        (a,) = ctx.saved
        return grad / a


class Abs(Function):
    @staticmethod
    def forward(ctx, a):
        ctx.save(np.sign(a))
        return np.abs(a)

    @staticmethod
    def backward(ctx, grad):
        (sign,) = ctx.saved
        return grad * sign


class ReLU(Function):
    @staticmethod
    def forward(ctx, a):
        mask = a > 0
        ctx.save(mask)
        return np.where(mask, a, a.dtype.type(0))

    @staticmethod
    def backward(ctx, grad):
        (mask,) = ctx.saved
        return grad * mask


class GELU(Function):
    """Exact GELU, ``x * Phi(x)``."""

    @staticmethod
    def forward(ctx, a):
        cdf = 0.5 * (1.0 + special.erf(a / math.sqrt(2.0)))
        ctx.save(a, cdf)
        return (a * cdf).astype(a.dtype, copy=False)

    @staticmethod
    def backward(ctx, grad):
        a, cdf = ctx.saved
        pdf = np.exp(-0.5 * a * a) / math.sqrt(2.0 * math.pi)
        return (grad * (cdf + a * pdf)).astype(a.dtype, copy=False)


class MatMul(Function):
    @staticmethod
    def forward(ctx, a, b):
        if a.ndim < 2 or b.ndim < 2 or a.shape[-1] != b.shape[-2]:
            raise ValueError(f"cannot multiply {a.shape} by {b.shape}")
        ctx.save(a, b)
        return a @ b

    @staticmethod
    def backward(ctx, grad):
        a, b = ctx.saved
        return grad @ np.swapaxes(b, -1, -2), np.swapaxes(a, -1, -2) @ grad


class Sum(Function):
    @staticmethod
    def forward(ctx, a, axis=None, keepdims=False):
        ctx.attrs.update(shape=a.shape, axes=_normalize_axes(axis, a.ndim), keepdims=keepdims)
        return a.sum(axis=axis, keepdims=keepdims)

    @staticmethod
    def backward(ctx, grad):
        shape, axes = ctx.attrs["shape"], ctx.attrs["axes"]
        if not ctx.attrs["keepdims"]:
            grad = np.expand_dims(grad, axes)
        return np.broadcast_to(grad, shape)


class Mean(Function):
    @staticmethod
    def forward(ctx, a, axis=None, keepdims=False):
        axes = _normalize_axes(axis, a.ndim)
        ctx.attrs.update(shape=a.shape, axes=axes, keepdims=keepdims,
                         count=int(np.prod([a.shape[i] for i in axes])) if axes else 1)
        return a.mean(axis=axis, keepdims=keepdims)

    @staticmethod
    def backward(ctx, grad):
        shape, axes = ctx.attrs["shape"], ctx.attrs["axes"]
        if not ctx.attrs["keepdims"]:
            grad = np.expand_dims(grad, axes)
        return np.broadcast_to(grad / grad.dtype.type(ctx.attrs["count"]), shape)


class Softmax(Function):
    @staticmethod
    def forward(ctx, a, axis=-1):
        shifted = np.exp(a - a.max(axis=axis, keepdims=True))
        out = shifted / shifted.sum(axis=axis, keepdims=True)
        ctx.save(out)
        ctx.attrs["axis"] = axis
        return out

    @staticmethod
    def backward(ctx, grad):
        (out,) = ctx.saved
        axis = ctx.attrs["axis"]
        return out * (grad - (grad * out).sum(axis=axis, keepdims=True))


class LogSoftmax(Function):
    @staticmethod
    def forward(ctx, a, axis=-1):
        shifted = a - a.max(axis=axis, keepdims=True)
        out = shifted - np.log(np.exp(shifted).sum(axis=axis, keepdims=True))
        ctx.save(out)
        ctx.attrs["axis"] = axis
        return out

    @staticmethod
    def backward(ctx, grad):
        (out,) = ctx.saved
        axis = ctx.attrs["axis"]
        return grad - np.exp(out) * grad.sum(axis=axis, keepdims=True)


class Reshape(Function):
    @staticmethod
    def forward(ctx, a, shape):
        ctx.attrs["shape"] = a.shape
        return a.reshape(shape)

    @staticmethod
    def backward(ctx, grad):
        return grad.reshape(ctx.attrs["shape"])


class Transpose(Function):
    @staticmethod
    def forward(ctx, a, axes):
        ctx.attrs["inverse"] = tuple(np.argsort(axes))
        return np.transpose(a, axes)

    @staticmethod
    def backward(ctx, grad):
        return np.transpose(grad, ctx.attrs["inverse"])


class GetItem(Function):
    @staticmethod
    def forward(ctx, a, index):
        ctx.attrs.update(shape=a.shape, dtype=a.dtype, index=index)
        return np.array(a[index], copy=True)

    @staticmethod
    def backward(ctx, grad):
        out = np.zeros(ctx.attrs["shape"], dtype=ctx.attrs["dtype"])
        np.add.at(out, ctx.attrs["index"], grad)
        return out


class BroadcastTo(Function):
    @staticmethod
    def forward(ctx, a, shape):
        return np.broadcast_to(a, shape).copy()

    @staticmethod
    def backward(ctx, grad):
        # The engine sums the gradient back down to the input shape.
        return grad


class Concat(Function):
    @staticmethod
    def forward(ctx, *arrays, axis=0):
        ctx.attrs.update(axis=axis, splits=np.cumsum([x.shape[axis] for x in arrays])[:-1])
        return np.concatenate(arrays, axis=axis)

    @staticmethod
    def backward(ctx, grad):
        return tuple(np.split(grad, ctx.attrs["splits"], axis=ctx.attrs["axis"]))


class Conv1d(Function):
    """Valid cross-correlation of ``(B, C, L)`` input with ``(O, C, K)`` weights."""

    @staticmethod
    def forward(ctx, x, w, stride=1):
        if x.ndim != 3 or w.ndim != 3 or x.shape[1] != w.shape[1] or x.shape[2] < w.shape[2]:
            raise ValueError(f"conv1d input {x.shape} does not fit weights {w.shape}")
        windows = np.lib.stride_tricks.sliding_window_view(x, w.shape[2], axis=2)[:, :, ::stride]
        ctx.save(x, w, windows)
        ctx.attrs["stride"] = stride
        out = np.tensordot(windows, w, axes=([1, 3], [1, 2]))  # (B, L_out, O)
        return np.ascontiguousarray(out.transpose(0, 2, 1))

    @staticmethod
    def backward(ctx, grad):
        x, w, windows = ctx.saved
        stride = ctx.attrs["stride"]
        length = grad.shape[2]
        grad_w = np.tensordot(grad, windows, axes=([0, 2], [0, 2]))  # (O, C, K)
        grad_x = np.zeros_like(x)
        for k in range(w.shape[2]):
            grad_x[:, :, k:k + stride * (length - 1) + 1:stride] += np.einsum("bol,oc->bcl", grad, w[:, :, k])
        return grad_x, grad_w


class Conv2d(Function):
    """Valid cross-correlation of ``(B, C, H, W)`` input with ``(O, C, KH, KW)`` weights."""

    @staticmethod
    def forward(ctx, x, w, stride=(1, 1)):
        if (
            x.ndim != 4 or w.ndim != 4 or x.shape[1] != w.shape[1]
            or x.shape[2] < w.shape[2] or x.shape[3] < w.shape[3]
        ):
            raise ValueError(f"conv2d input {x.shape} does not fit weights {w.shape}")
        sh, sw = stride
        windows = np.lib.stride_tricks.sliding_window_view(x, w.shape[2:], axis=(2, 3))[:, :, ::sh, ::sw]
        ctx.save(x, w, windows)
        ctx.attrs["stride"] = stride
        out = np.tensordot(windows, w, axes=([1, 4, 5], [1, 2, 3]))  # (B, H_out, W_out, O)
        return np.ascontiguousarray(out.transpose(0, 3, 1, 2))

    @staticmethod
    def backward(ctx, grad):
        x, w, windows = ctx.saved
        sh, sw = ctx.attrs["stride"]
        h_out, w_out = grad.shape[2:]
        grad_w = np.tensordot(grad, windows, axes=([0, 2, 3], [0, 2, 3]))  # (O, C, KH, KW)
        grad_x = np.zeros_like(x)
        for i in range(w.shape[2]):
            for j in range(w.shape[3]):
                grad_x[:, :, i:i + sh * (h_out - 1) + 1:sh, j:j + sw * (w_out - 1) + 1:sw] += np.einsum(
                    "bohw,oc->bchw", grad, w[:, :, i, j]
                )
        return grad_x, grad_w


class MaxPool1d(Function):
    """Non-overlapping max pooling over the last axis; a ragged tail is dropped."""

    @staticmethod
    def forward(ctx, x, kernel):
        batch, channels, length = x.shape
        out_len = length // kernel
        if out_len == 0:
            raise ValueError(f"pool size {kernel} exceeds length {length}")
        blocks = x[:, :, :out_len * kernel].reshape(batch, channels, out_len, kernel)
        argmax = blocks.argmax(axis=-1)[..., None]
        ctx.save(argmax)
        ctx.attrs.update(shape=x.shape, kernel=kernel)
        return np.take_along_axis(blocks, argmax, axis=-1)[..., 0]

    @staticmethod
    def backward(ctx, grad):
        (argmax,) = ctx.saved
        batch, channels, length = ctx.attrs["shape"]
        kernel = ctx.attrs["kernel"]
        out_len = grad.shape[2]
        blocks = np.zeros((batch, channels, out_len, kernel), dtype=grad.dtype)
        np.put_along_axis(blocks, argmax, grad[..., None], axis=-1)
        grad_x = np.zeros((batch, channels, length), dtype=grad.dtype)
        grad_x[:, :, :out_len * kernel] = blocks.reshape(batch, channels, out_len * kernel)
        return grad_x


class MaxPool2d(Function):
    """Non-overlapping ``k x k`` max pooling; ragged rows and columns are dropped."""

    @staticmethod
    def forward(ctx, x, kernel):
        batch, channels, height, width = x.shape
        h_out, w_out = height // kernel, width // kernel
        if h_out == 0 or w_out == 0:
            raise ValueError(f"pool size {kernel} exceeds map {height}x{width}")
        trimmed = x[:, :, :h_out * kernel, :w_out * kernel]
        blocks = trimmed.reshape(batch, channels, h_out, kernel, w_out, kernel).transpose(0, 1, 2, 4, 3, 5)
        blocks = blocks.reshape(batch, channels, h_out, w_out, kernel * kernel)
        argmax = blocks.argmax(axis=-1)[..., None]
        ctx.save(argmax)
        ctx.attrs.update(shape=x.shape, kernel=kernel)
        return np.take_along_axis(blocks, argmax, axis=-1)[..., 0]

    @staticmethod
    def backward(ctx, grad):
        (argmax,) = ctx.saved
        batch, channels, height, width = ctx.attrs["shape"]
        kernel = ctx.attrs["kernel"]
        h_out, w_out = grad.shape[2:]
        blocks = np.zeros((batch, channels, h_out, w_out, kernel * kernel), dtype=grad.dtype)
        np.put_along_axis(blocks, argmax, grad[..., None], axis=-1)
        blocks = blocks.reshape(batch, channels, h_out, w_out, kernel, kernel).transpose(0, 1, 2, 4, 3, 5)
        grad_x = np.zeros((batch, channels, height, width), dtype=grad.dtype)
        grad_x[:, :, :h_out * kernel, :w_out * kernel] = blocks.reshape(
            batch, channels, h_out * kernel, w_out * kernel
        )
        return grad_x
