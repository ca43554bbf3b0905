"""
Model configuration shared by the backbones, the heads and checkpoints.
"""

from dataclasses import asdict, dataclass
from enum import Enum
from typing import Any, Dict, Optional, Tuple

from radchar.apps.core.exceptions import ModelConfigValidationError
from radchar.apps.core.validators import RangeValidator, ValidationResult


class BackboneKind(str, Enum):
    CNN2D = "cnn2d"
    CNN1D = "cnn1d"
    IQST_S = "iqst-s"
    IQST_L = "iqst-l"

    @property
    def is_transformer(self) -> bool:
        return self in (BackboneKind.IQST_S, BackboneKind.IQST_L)

    @classmethod
    def choices(cls) -> Tuple[str, ...]:
        return tuple(kind.value for kind in cls)


# (attention heads, encoder layers)
IQST_VARIANTS = {
    BackboneKind.IQST_S: (3, 3),
    BackboneKind.IQST_L: (9, 6),
}

NUM_CLASSES = 5
NUM_TOKENS = 8
MAX_CONV_LAYERS = 4


@dataclass(frozen=True)
class ModelConfig:
    """
    Architecture of one multi-task model.

    ``num_heads``, ``num_layers``, ``head_dim`` and ``d_ff`` default from the
    backbone kind and ``d_model`` when left unset.
    """

    backbone: BackboneKind = BackboneKind.IQST_S
    d_model: int = 128
    num_heads: Optional[int] = None
    num_layers: Optional[int] = None
    head_dim: Optional[int] = None
    d_ff: Optional[int] = None
    encoder_dropout: float = 0.1
    conv_layers: int = 1
    filters: int = 8
    backbone_dropout: float = 0.25
    head_filters: int = 8
    head_hidden: int = 32
    head_conv_dropout: float = 0.25
    head_dense_dropout: float = 0.5

    def __post_init__(self):
        try:
            object.__setattr__(self, "backbone", BackboneKind(self.backbone))
        except ValueError:
            raise ModelConfigValidationError(
                f"Unknown backbone {self.backbone!r}; choose one of {', '.join(BackboneKind.choices())}"
            ) from None

    @property
    def heads(self) -> int:
        return self.num_heads or IQST_VARIANTS.get(self.backbone, (1, 1))[0]

    @property
    def layers(self) -> int:
        return self.num_layers or IQST_VARIANTS.get(self.backbone, (1, 1))[1]

    @property
    def attention_head_dim(self) -> int:
        """Defaults to d_model: 128 splits evenly over neither 3 nor 9 heads."""
        return self.head_dim or self.d_model

    @property
    def feed_forward_dim(self) -> int:
        return self.d_ff or 4 * self.d_model

    def check(self) -> ValidationResult:
        result = ValidationResult()
        for name in ("d_model", "filters", "head_filters", "head_hidden"):
            result.merge(RangeValidator.validate_integer(name, getattr(self, name), low=1))
        for name in ("num_heads", "num_layers", "head_dim", "d_ff"):
            if getattr(self, name) is not None:
                result.merge(RangeValidator.validate_integer(name, getattr(self, name), low=1))
        result.merge(RangeValidator.validate_integer("conv_layers", self.conv_layers, 1, MAX_CONV_LAYERS))
        for name in ("encoder_dropout", "backbone_dropout", "head_conv_dropout", "head_dense_dropout"):
            value = getattr(self, name)
            if not 0.0 <= value < 1.0:
                result.add_error(name, f"{name} must be in [0, 1)", {"actual": value})
        # The head convolution needs at least 3 positions on the backbone output.
        if self.backbone.is_transformer and result and self.d_model < 3:
            result.add_error("d_model", "d_model must be at least 3", {"actual": self.d_model})
        return result

    def validate(self) -> "ModelConfig":
        self.check().raise_for_errors(ModelConfigValidationError)
        return self

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        data["backbone"] = self.backbone.value
        return data

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "ModelConfig":
        unknown = set(data) - set(cls.__dataclass_fields__)
        if unknown:
            raise ModelConfigValidationError(f"Unknown model config keys: {', '.join(sorted(unknown))}")
        return cls(**data)
