"""
Training hyperparameters and task weights.
"""

import hashlib
from dataclasses import asdict, dataclass, field
from typing import Any, Dict, Optional, Sequence, Union

import numpy as np

from radchar.apps.core.exceptions import ConfigurationException, ValidationException
from radchar.apps.core.validators import RangeValidator, TrainingValidator, ValidationResult
from radchar.apps.datasets.config import canonical_json
from radchar.apps.networks.config import ModelConfig

WEIGHT_NAMES = ("class", "n_p", "t_pw", "t_pri", "t_d")


@dataclass(frozen=True)
class TaskWeights:
    """Weights of the five task losses, in ``WEIGHT_NAMES`` order."""

    w_class: float = 0.1
    w_np: float = 0.225
    w_tpw: float = 0.225
    w_tpri: float = 0.225
    w_td: float = 0.225

    def as_tuple(self):
        return (self.w_class, self.w_np, self.w_tpw, self.w_tpri, self.w_td)

    def as_dict(self) -> Dict[str, float]:
        return dict(zip(WEIGHT_NAMES, self.as_tuple()))

    def scaled(self, factor: float) -> "TaskWeights":
        return TaskWeights(*(factor * w for w in self.as_tuple()))

    def check(self) -> ValidationResult:
        return TrainingValidator.validate_task_weights(self.as_dict())

    @classmethod
    def parse(cls, value: Union[str, Sequence[float], "TaskWeights"]) -> "TaskWeights":
        """
        Read weights from ``"0.1,0.225,0.225,0.225,0.225"`` or a 5-item list.

        Raises:
            ConfigurationException: Not exactly five numbers.
        """
        if isinstance(value, TaskWeights):
            return value
        parts = value.split(",") if isinstance(value, str) else list(value)
        try:
            numbers = [float(part) for part in parts]
        except (TypeError, ValueError):
            raise ConfigurationException(f"Task weights must be numbers, got {value!r}") from None
        if len(numbers) != len(WEIGHT_NAMES):
            raise ConfigurationException(
                f"Expected {len(WEIGHT_NAMES)} task weights ({', '.join(WEIGHT_NAMES)}), got {len(numbers)}"
            )
        return cls(*numbers)


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 100
    lr: float = 5e-4
    batch_size: int = 64
    seed: int = 0
    weights: TaskWeights = field(default_factory=TaskWeights)
    subset: Optional[int] = None
    model: ModelConfig = field(default_factory=ModelConfig)

    def check(self) -> ValidationResult:
        result = TrainingValidator.validate_hyperparameters(self.epochs, self.lr, self.batch_size)
        result.merge(RangeValidator.validate_integer("seed", self.seed, low=0))
        if self.subset is not None:
            result.merge(RangeValidator.validate_integer("subset", self.subset, low=1))
        result.merge(self.weights.check())
        result.merge(self.model.check())
        return result

    def validate(self) -> "TrainConfig":
        self.check().raise_for_errors(ValidationException, "Invalid training configuration")
        return self

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        data["weights"] = self.weights.as_dict()
        data["model"] = self.model.to_dict()
        return data

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "TrainConfig":
        data = dict(data)
        weights = data.pop("weights", None)
        model = data.pop("model", None)
        return cls(
            weights=TaskWeights(*(weights[name] for name in WEIGHT_NAMES)) if weights else TaskWeights(),
            model=ModelConfig.from_dict(model) if model else ModelConfig(),
            **data,
        )

    def config_hash(self) -> str:
        return hashlib.sha256(canonical_json(self.to_dict()).encode("utf-8")).hexdigest()

    def shuffle_rng(self) -> np.random.Generator:
        """Batch-order stream, independent of the model's init and dropout streams."""
        return np.random.default_rng(np.random.SeedSequence(self.seed, spawn_key=(2,)))
