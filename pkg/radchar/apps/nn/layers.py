"""
Layer library built on the autograd tensor.

Modules register their parameters, buffers and children on assignment, so
``named_parameters()`` walks a model in declaration order. Every layer also
implements ``output_shape`` over per-sample shapes (batch axis excluded).
"""

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, Iterator, Mapping, Optional, Sequence, Tuple, Union

import numpy as np

from radchar.apps.core.exceptions import ErrorDetail, ShapeError, ValidationException
from radchar.apps.core.validators import RangeValidator, ValidationResult

from . import tensor as ops
from .tensor import Tensor

Shape = Tuple[int, ...]


def _shape_error(layer: "Module", expected: str, actual: Shape) -> ShapeError:
    return ShapeError(
        f"{type(layer).__name__} expects {expected}, got {tuple(actual)}",
        details=[ErrorDetail(message="input shape does not fit the layer", code="shape",
                             context={"expected": expected, "actual": list(actual)})],
    )


def _lecun_normal(rng: Optional[np.random.Generator], shape: Shape, fan_in: int) -> np.ndarray:
    rng = rng if rng is not None else np.random.default_rng()
    return rng.normal(0.0, math.sqrt(1.0 / fan_in), size=shape).astype(np.float32)


class Parameter(Tensor):
    """Leaf tensor owned by a module, with a gradient buffer of the same shape."""

    __slots__ = ("trainable",)

    def __init__(self, data, trainable: bool = True):
        super().__init__(data, requires_grad=trainable)
        self.trainable = trainable
        self.grad = np.zeros_like(self.data)

    def __repr__(self) -> str:
        return f"Parameter(shape={self.shape}, dtype={self.dtype}, trainable={self.trainable})"


class Module:
    """Base class of layers and models."""

    def __init__(self):
        object.__setattr__(self, "_parameters", {})
        object.__setattr__(self, "_buffers", {})
        object.__setattr__(self, "_modules", {})
        object.__setattr__(self, "training", True)

    def __setattr__(self, name: str, value: Any) -> None:
        if isinstance(value, Parameter):
            self._parameters[name] = value
        elif isinstance(value, Module):
            self._modules[name] = value
        object.__setattr__(self, name, value)

    def __call__(self, *args, **kwargs):
        return self.forward(*args, **kwargs)

    def forward(self, x: Tensor) -> Tensor:
        raise NotImplementedError

    def output_shape(self, input_shape: Shape) -> Shape:
        raise NotImplementedError(f"{type(self).__name__} does not define a shape function")

    def register_buffer(self, name: str, value: np.ndarray) -> None:
        self._buffers[name] = value

    # Traversal

    def children(self) -> Iterator["Module"]:
        return iter(self._modules.values())

    def modules(self) -> Iterator["Module"]:
        yield self
        for child in self._modules.values():
            yield from child.modules()

    def named_parameters(self, prefix: str = "") -> Iterator[Tuple[str, Parameter]]:
        for name, param in self._parameters.items():
            yield prefix + name, param
        for name, child in self._modules.items():
            yield from child.named_parameters(f"{prefix}{name}.")

    def parameters(self) -> Iterator[Parameter]:
        for _, param in self.named_parameters():
            yield param

    def named_buffers(self, prefix: str = "") -> Iterator[Tuple[str, np.ndarray]]:
        for name, value in self._buffers.items():
            yield prefix + name, value
        for name, child in self._modules.items():
            yield from child.named_buffers(f"{prefix}{name}.")

    def num_parameters(self, trainable_only: bool = True) -> int:
        return sum(p.size for p in self.parameters() if p.trainable or not trainable_only)

    # Modes

    def train(self, mode: bool = True) -> "Module":
        for module in self.modules():
            object.__setattr__(module, "training", mode)
        return self

    def eval(self) -> "Module":
        return self.train(False)

    def zero_grad(self) -> None:
        for param in self.parameters():
            param.zero_grad()

    def astype(self, dtype) -> "Module":
        """Cast parameters and buffers in place, e.g. to float64 for gradient checks."""
        for module in self.modules():
            for param in module._parameters.values():
                param.data = param.data.astype(dtype)
                param.grad = np.zeros_like(param.data)
            for name, value in module._buffers.items():
                module._buffers[name] = value.astype(dtype)
        return self

    # State

    def state_dict(self) -> Dict[str, Dict[str, np.ndarray]]:
        return {
            "params": {name: param.data.copy() for name, param in self.named_parameters()},
            "buffers": {name: value.copy() for name, value in self.named_buffers()},
        }

    def load_state_dict(self, params: Mapping[str, np.ndarray], buffers: Mapping[str, np.ndarray]) -> None:
        """
        Copy arrays into this module's parameters and buffers.

        Raises:
            ShapeError: A name is missing or an array has the wrong shape.
        """
        expected = dict(self.named_parameters())
        unmatched = sorted(set(expected) ^ set(params))
        if unmatched:
            raise ShapeError(
                "Parameter names do not match the model",
                details=[ErrorDetail(message=f"unmatched parameter {name}", code="state", field=name)
                         for name in unmatched],
            )
        for name, param in expected.items():
            value = np.asarray(params[name])
            if value.shape != param.shape:
                raise ShapeError(f"Parameter {name} has shape {value.shape}, model expects {param.shape}")
            param.data = value.astype(param.dtype, copy=True)
            param.grad = np.zeros_like(param.data)

        owners = {}
        for prefix, module in self._named_modules():
            for name in module._buffers:
                owners[prefix + name] = (module, name)
        if set(owners) != set(buffers):
            raise ShapeError("Buffer names do not match the model")
        for key, (module, name) in owners.items():
            value = np.asarray(buffers[key])
            if value.shape != module._buffers[name].shape:
                raise ShapeError(f"Buffer {key} has shape {value.shape}, model expects {module._buffers[name].shape}")
            module._buffers[name] = value.astype(module._buffers[name].dtype, copy=True)

    def _named_modules(self, prefix: str = "") -> Iterator[Tuple[str, "Module"]]:
        yield prefix, self
        for name, child in self._modules.items():
            yield from child._named_modules(f"{prefix}{name}.")


class Linear(Module):
    """``y = x @ W + b`` with ``W`` stored as (in_features, out_features)."""

    def __init__(self, in_features: int, out_features: int, bias: bool = True, rng=None):
        super().__init__()
        self.in_features = in_features
        self.out_features = out_features
        self.fan_in = in_features
        self.weight = Parameter(_lecun_normal(rng, (in_features, out_features), self.fan_in))
        self.bias = Parameter(np.zeros(out_features, dtype=np.float32)) if bias else None

    def forward(self, x: Tensor) -> Tensor:
        if x.ndim < 2 or x.shape[-1] != self.in_features:
            raise _shape_error(self, f"(..., {self.in_features})", x.shape)
        out = x @ self.weight
        return out + self.bias if self.bias is not None else out

    def output_shape(self, input_shape: Shape) -> Shape:
        if not input_shape or input_shape[-1] != self.in_features:
            raise _shape_error(self, f"(..., {self.in_features})", input_shape)
        return tuple(input_shape[:-1]) + (self.out_features,)


class Conv1d(Module):
    """Valid 1D convolution over (B, C, L)."""

    def __init__(self, in_channels: int, out_channels: int, kernel_size: int, stride: int = 1, rng=None):
        super().__init__()
        self.in_channels = in_channels
        self.out_channels = out_channels
        self.kernel_size = kernel_size
        self.stride = stride
        self.fan_in = in_channels * kernel_size
        self.weight = Parameter(_lecun_normal(rng, (out_channels, in_channels, kernel_size), self.fan_in))
        self.bias = Parameter(np.zeros(out_channels, dtype=np.float32))

    def forward(self, x: Tensor) -> Tensor:
        if x.ndim != 3:
            raise _shape_error(self, f"(B, {self.in_channels}, L)", x.shape)
        self.output_shape(x.shape[1:])
        out = ops.Conv1d.apply(x, self.weight, stride=self.stride)
        return out + self.bias.reshape(self.out_channels, 1)

    def output_shape(self, input_shape: Shape) -> Shape:
        if len(input_shape) != 2 or input_shape[0] != self.in_channels or input_shape[1] < self.kernel_size:
            raise _shape_error(self, f"({self.in_channels}, L >= {self.kernel_size})", input_shape)
        return self.out_channels, (input_shape[1] - self.kernel_size) // self.stride + 1


class Conv2d(Module):
    """Valid 2D convolution over (B, C, H, W)."""

    def __init__(self, in_channels: int, out_channels: int, kernel_size, stride=1, rng=None):
        super().__init__()
        self.in_channels = in_channels
        self.out_channels = out_channels
        self.kernel_size = _pair(kernel_size)
        self.stride = _pair(stride)
        self.fan_in = in_channels * self.kernel_size[0] * self.kernel_size[1]
        self.weight = Parameter(
            _lecun_normal(rng, (out_channels, in_channels) + self.kernel_size, self.fan_in)
        )
        self.bias = Parameter(np.zeros(out_channels, dtype=np.float32))

    def forward(self, x: Tensor) -> Tensor:
        if x.ndim != 4:
            raise _shape_error(self, f"(B, {self.in_channels}, H, W)", x.shape)
        self.output_shape(x.shape[1:])
        out = ops.Conv2d.apply(x, self.weight, stride=self.stride)
        return out + self.bias.reshape(self.out_channels, 1, 1)

    def output_shape(self, input_shape: Shape) -> Shape:
        kh, kw = self.kernel_size
        if (
            len(input_shape) != 3 or input_shape[0] != self.in_channels
            or input_shape[1] < kh or input_shape[2] < kw
        ):
            raise _shape_error(self, f"({self.in_channels}, H >= {kh}, W >= {kw})", input_shape)
        return (
            self.out_channels,
            (input_shape[1] - kh) // self.stride[0] + 1,
            (input_shape[2] - kw) // self.stride[1] + 1,
        )


def _pair(value) -> Tuple[int, int]:
    if isinstance(value, int):
        return value, value
    return tuple(int(v) for v in value)


class MaxPool1d(Module):
    def __init__(self, kernel_size: int):
        super().__init__()
        self.kernel_size = kernel_size

    def forward(self, x: Tensor) -> Tensor:
        self.output_shape(x.shape[1:])
        return ops.MaxPool1d.apply(x, kernel=self.kernel_size)

    def output_shape(self, input_shape: Shape) -> Shape:
        if len(input_shape) != 2 or input_shape[1] < self.kernel_size:
            raise _shape_error(self, f"(C, L >= {self.kernel_size})", input_shape)
        return input_shape[0], input_shape[1] // self.kernel_size


class MaxPool2d(Module):
    def __init__(self, kernel_size: int):
        super().__init__()
        self.kernel_size = kernel_size

    def forward(self, x: Tensor) -> Tensor:
        self.output_shape(x.shape[1:])
        return ops.MaxPool2d.apply(x, kernel=self.kernel_size)

    def output_shape(self, input_shape: Shape) -> Shape:
        k = self.kernel_size
        if len(input_shape) != 3 or input_shape[1] < k or input_shape[2] < k:
            raise _shape_error(self, f"(C, H >= {k}, W >= {k})", input_shape)
        return input_shape[0], input_shape[1] // k, input_shape[2] // k


class BatchNorm(Module):
    """
    Batch normalisation over axis 1 of (B, C), (B, C, L) or (B, C, H, W).

    Train mode normalises with batch statistics and updates the running
    estimates; eval mode uses the running estimates.
    """

    def __init__(self, num_features: int, momentum: float = 0.1, eps: float = 1e-5):
        super().__init__()
        self.num_features = num_features
        self.momentum = momentum
        self.eps = eps
        self.gamma = Parameter(np.ones(num_features, dtype=np.float32))
        self.beta = Parameter(np.zeros(num_features, dtype=np.float32))
        self.register_buffer("running_mean", np.zeros(num_features, dtype=np.float32))
        self.register_buffer("running_var", np.ones(num_features, dtype=np.float32))

    @property
    def running_mean(self) -> np.ndarray:
        return self._buffers["running_mean"]

    @property
    def running_var(self) -> np.ndarray:
        return self._buffers["running_var"]

    def forward(self, x: Tensor) -> Tensor:
        if x.ndim < 2 or x.shape[1] != self.num_features:
            raise _shape_error(self, f"(B, {self.num_features}, ...)", x.shape)
        axes = (0,) + tuple(range(2, x.ndim))
        view = (1, self.num_features) + (1,) * (x.ndim - 2)

        if self.training:
            mean = x.mean(axis=axes, keepdims=True)
            centred = x - mean
            var = (centred * centred).mean(axis=axes, keepdims=True)
            count = x.size // self.num_features
            unbiased = var.data.reshape(-1) * (count / max(count - 1, 1))
            m = self.momentum
            self._buffers["running_mean"] = ((1 - m) * self.running_mean + m * mean.data.reshape(-1)).astype(
                self.running_mean.dtype
            )
            self._buffers["running_var"] = ((1 - m) * self.running_var + m * unbiased).astype(self.running_var.dtype)
            normalised = centred / (var + self.eps).sqrt()
        else:
            mean = self.running_mean.reshape(view)
            inv_std = 1.0 / np.sqrt(self.running_var.reshape(view) + self.eps)
            normalised = (x - mean.astype(x.dtype)) * inv_std.astype(x.dtype)

        return normalised * self.gamma.reshape(view) + self.beta.reshape(view)

    def output_shape(self, input_shape: Shape) -> Shape:
        if not input_shape or input_shape[0] != self.num_features:
            raise _shape_error(self, f"({self.num_features}, ...)", input_shape)
        return tuple(input_shape)


class LayerNorm(Module):
    """Normalises the last axis."""

    def __init__(self, normalized_shape: int, eps: float = 1e-5):
        super().__init__()
        self.normalized_shape = normalized_shape
        self.eps = eps
        self.gamma = Parameter(np.ones(normalized_shape, dtype=np.float32))
        self.beta = Parameter(np.zeros(normalized_shape, dtype=np.float32))

    def forward(self, x: Tensor) -> Tensor:
        if x.shape[-1] != self.normalized_shape:
            raise _shape_error(self, f"(..., {self.normalized_shape})", x.shape)
        centred = x - x.mean(axis=-1, keepdims=True)
        var = (centred * centred).mean(axis=-1, keepdims=True)
        return centred / (var + self.eps).sqrt() * self.gamma + self.beta

    def output_shape(self, input_shape: Shape) -> Shape:
        if not input_shape or input_shape[-1] != self.normalized_shape:
            raise _shape_error(self, f"(..., {self.normalized_shape})", input_shape)
        return tuple(input_shape)


class Dropout(Module):
    """
    Inverted dropout: kept units are scaled by ``1 / (1 - rate)`` in train
    mode; eval mode returns the input unchanged.

    ``rng`` is normally shared by every dropout layer of a model (see
    ``nn.init.seed_dropout``) so masks follow from one seed.
    """

    def __init__(self, rate: float, rng: Optional[np.random.Generator] = None):
        super().__init__()
        if not 0.0 <= rate < 1.0:
            raise ValidationException(f"Dropout rate must be in [0, 1), got {rate}")
        self.rate = rate
        self.rng = rng

    def forward(self, x: Tensor) -> Tensor:
        if not self.training or self.rate == 0.0:
            return x
        if self.rng is None:
            self.rng = np.random.default_rng(0)
        keep = self.rng.random(x.shape) >= self.rate
        return x * (keep / (1.0 - self.rate)).astype(x.dtype)

    def output_shape(self, input_shape: Shape) -> Shape:
        return tuple(input_shape)


class ReLU(Module):
    def forward(self, x: Tensor) -> Tensor:
        return x.relu()

    def output_shape(self, input_shape: Shape) -> Shape:
        return tuple(input_shape)


class GELU(Module):
    def forward(self, x: Tensor) -> Tensor:
        return x.gelu()

    def output_shape(self, input_shape: Shape) -> Shape:
        return tuple(input_shape)


class Softmax(Module):
    def __init__(self, axis: int = -1):
        super().__init__()
        self.axis = axis

    def forward(self, x: Tensor) -> Tensor:
        return x.softmax(axis=self.axis)

    def output_shape(self, input_shape: Shape) -> Shape:
        return tuple(input_shape)


class Flatten(Module):
    def forward(self, x: Tensor) -> Tensor:
        return x.flatten(1)

    def output_shape(self, input_shape: Shape) -> Shape:
        return (int(np.prod(input_shape)),)


class Sequential(Module):
    def __init__(self, *layers: Module):
        super().__init__()
        for index, layer in enumerate(layers):
            setattr(self, str(index), layer)

    def __iter__(self) -> Iterator[Module]:
        return iter(self._modules.values())

    def __len__(self) -> int:
        return len(self._modules)

    def __getitem__(self, index: int) -> Module:
        return list(self._modules.values())[index]

    def forward(self, x: Tensor) -> Tensor:
        for layer in self._modules.values():
            x = layer(x)
        return x

    def output_shape(self, input_shape: Shape) -> Shape:
        for layer in self._modules.values():
            input_shape = layer.output_shape(input_shape)
        return tuple(input_shape)


class ModuleDict(Module):
    def __init__(self, modules: Mapping[str, Module]):
        super().__init__()
        for name, module in modules.items():
            setattr(self, name, module)

    def __getitem__(self, name: str) -> Module:
        return self._modules[name]

    def keys(self):
        return self._modules.keys()

    def items(self):
        return self._modules.items()


class MultiHeadSelfAttention(Module):
    """
    Scaled dot-product self-attention over (B, T, d_model).

    Each head projects to ``head_dim`` features; without ``head_dim`` the
    model width is split evenly across heads. Scores are scaled by
    ``1 / sqrt(head_dim)``.
    """

    def __init__(
        self,
        d_model: int,
        num_heads: int,
        head_dim: Optional[int] = None,
        dropout: float = 0.0,
        rng=None,
    ):
        super().__init__()
        if head_dim is None:
            if d_model % num_heads:
                raise ValidationException(f"d_model {d_model} is not divisible by {num_heads} heads")
            head_dim = d_model // num_heads
        self.d_model = d_model
        self.num_heads = num_heads
        self.head_dim = head_dim
        inner = num_heads * head_dim
        self.query = Linear(d_model, inner, rng=rng)
        self.key = Linear(d_model, inner, rng=rng)
        self.value = Linear(d_model, inner, rng=rng)
        self.out = Linear(inner, d_model, rng=rng)
        self.attn_dropout = Dropout(dropout)

    def _split_heads(self, x: Tensor, batch: int, tokens: int) -> Tensor:
        return x.reshape(batch, tokens, self.num_heads, self.head_dim).transpose(0, 2, 1, 3)

    def forward(self, x: Tensor) -> Tensor:
        if x.ndim != 3 or x.shape[-1] != self.d_model:
            raise _shape_error(self, f"(B, T, {self.d_model})", x.shape)
        batch, tokens, _ = x.shape
        q = self._split_heads(self.query(x), batch, tokens)
        k = self._split_heads(self.key(x), batch, tokens)
        v = self._split_heads(self.value(x), batch, tokens)

        scores = (q @ k.transpose(0, 1, 3, 2)) * (1.0 / math.sqrt(self.head_dim))
        weights = self.attn_dropout(scores.softmax(axis=-1))
        context = (weights @ v).transpose(0, 2, 1, 3).reshape(batch, tokens, self.num_heads * self.head_dim)
        return self.out(context)

    def output_shape(self, input_shape: Shape) -> Shape:
        if len(input_shape) != 2 or input_shape[-1] != self.d_model:
            raise _shape_error(self, f"(T, {self.d_model})", input_shape)
        return tuple(input_shape)


class FeedForward(Module):
    """Position-wise ``Linear -> GELU -> Dropout -> Linear``."""

    def __init__(self, d_model: int, d_ff: int, dropout: float = 0.0, rng=None):
        super().__init__()
        self.d_model = d_model
        self.d_ff = d_ff
        self.expand = Linear(d_model, d_ff, rng=rng)
        self.activation = GELU()
        self.dropout = Dropout(dropout)
        self.project = Linear(d_ff, d_model, rng=rng)

    def forward(self, x: Tensor) -> Tensor:
        return self.project(self.dropout(self.activation(self.expand(x))))

    def output_shape(self, input_shape: Shape) -> Shape:
        return self.project.output_shape(self.expand.output_shape(input_shape))


class TransformerEncoderLayer(Module):
    """Post-norm encoder block: attention, add, norm, feed-forward, add, norm."""

    def __init__(
        self,
        d_model: int,
        num_heads: int,
        d_ff: int,
        dropout: float = 0.1,
        head_dim: Optional[int] = None,
        rng=None,
    ):
        super().__init__()
        self.attention = MultiHeadSelfAttention(d_model, num_heads, head_dim=head_dim, rng=rng)
        self.dropout1 = Dropout(dropout)
        self.norm1 = LayerNorm(d_model)
        self.feed_forward = FeedForward(d_model, d_ff, dropout=dropout, rng=rng)
        self.dropout2 = Dropout(dropout)
        self.norm2 = LayerNorm(d_model)

    def forward(self, x: Tensor) -> Tensor:
        x = self.norm1(x + self.dropout1(self.attention(x)))
        return self.norm2(x + self.dropout2(self.feed_forward(x)))

    def output_shape(self, input_shape: Shape) -> Shape:
        return self.attention.output_shape(input_shape)


class LayerKind(str, Enum):
    LINEAR = "linear"
    CONV1D = "conv1d"
    CONV2D = "conv2d"
    MAXPOOL1D = "maxpool1d"
    MAXPOOL2D = "maxpool2d"
    BATCHNORM = "batchnorm"
    DROPOUT = "dropout"
    ATTENTION = "attention"
    FEEDFORWARD = "feedforward"
    LAYERNORM = "layernorm"
    RELU = "relu"
    GELU = "gelu"
    SOFTMAX = "softmax"
    FLATTEN = "flatten"


_DIMENSION_ARGS = {
    LayerKind.LINEAR: ("in_features", "out_features"),
    LayerKind.CONV1D: ("in_channels", "out_channels", "kernel_size"),
    LayerKind.CONV2D: ("in_channels", "out_channels"),
    LayerKind.MAXPOOL1D: ("kernel_size",),
    LayerKind.MAXPOOL2D: ("kernel_size",),
    LayerKind.BATCHNORM: ("num_features",),
    LayerKind.ATTENTION: ("d_model", "num_heads"),
    LayerKind.FEEDFORWARD: ("d_model", "d_ff"),
    LayerKind.LAYERNORM: ("normalized_shape",),
}


@dataclass(frozen=True)
class LayerSpec:
    """Declarative description of one layer, e.g. ``LayerSpec("conv1d", {...})``."""

    kind: LayerKind
    args: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "kind", LayerKind(self.kind))

    def check(self) -> ValidationResult:
        result = ValidationResult()
        for name in _DIMENSION_ARGS.get(self.kind, ()):
            result.merge(RangeValidator.validate_integer(f"{self.kind.value}.{name}", self.args.get(name), low=1))
        if self.kind == LayerKind.CONV2D:
            for value in _pair(self.args.get("kernel_size", 0)):
                result.merge(RangeValidator.validate_integer(f"{self.kind.value}.kernel_size", value, low=1))
        if "rate" in self.args or self.kind == LayerKind.DROPOUT:
            rate = self.args.get("rate")
            if rate is None or not 0.0 <= float(rate) < 1.0:
                result.add_error(f"{self.kind.value}.rate", "Dropout rate must be in [0, 1)", {"actual": rate})
        if self.kind == LayerKind.ATTENTION and result and self.args.get("head_dim") is None:
            if self.args["d_model"] % self.args["num_heads"]:
                result.add_error(
                    "attention.num_heads",
                    "d_model must be divisible by the number of heads",
                    {"d_model": self.args["d_model"], "num_heads": self.args["num_heads"]},
                )
        return result

    def to_dict(self) -> Dict[str, Any]:
        return {"kind": self.kind.value, "args": dict(self.args)}


_BUILDERS = {
    LayerKind.LINEAR: Linear,
    LayerKind.CONV1D: Conv1d,
    LayerKind.CONV2D: Conv2d,
    LayerKind.MAXPOOL1D: MaxPool1d,
    LayerKind.MAXPOOL2D: MaxPool2d,
    LayerKind.BATCHNORM: BatchNorm,
    LayerKind.DROPOUT: Dropout,
    LayerKind.ATTENTION: MultiHeadSelfAttention,
    LayerKind.FEEDFORWARD: FeedForward,
    LayerKind.LAYERNORM: LayerNorm,
    LayerKind.RELU: ReLU,
    LayerKind.GELU: GELU,
    LayerKind.SOFTMAX: Softmax,
    LayerKind.FLATTEN: Flatten,
}


def build_layer(spec: Union[LayerSpec, Mapping[str, Any]], rng: Optional[np.random.Generator] = None) -> Module:
    """
    Instantiate the layer a spec describes.

    Raises:
        ValidationException: The spec has non-positive dimensions, a dropout
            rate outside [0, 1), or heads that do not divide d_model.
    """
    if not isinstance(spec, LayerSpec):
        spec = LayerSpec(spec["kind"], dict(spec.get("args", {})))
    spec.check().raise_for_errors(ValidationException, f"Invalid {spec.kind.value} layer")

    args = dict(spec.args)
    if spec.kind in (LayerKind.LINEAR, LayerKind.CONV1D, LayerKind.CONV2D,
                     LayerKind.ATTENTION, LayerKind.FEEDFORWARD, LayerKind.DROPOUT):
        args["rng"] = rng
    return _BUILDERS[spec.kind](**args)


def build_sequential(specs: Sequence[LayerSpec], rng: Optional[np.random.Generator] = None) -> Sequential:
    return Sequential(*(build_layer(spec, rng) for spec in specs))
