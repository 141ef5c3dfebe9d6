"""
Training loop for the angular-slice classifiers.
"""
import json
import logging
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, Field, field_validator

from ...core.exceptions import NonFiniteError, SchemaMismatchError, TrainingDivergenceError
from ...core.logging import get_event_logger
from ...models.reports import missing_fields
from ...models.tables import ModelTable
from ...observability.metrics import increment_metric, timed
from .adam import Adam
from .dataset import AngularDataset
from .mlp import MlpParams, cross_entropy, init_params, loss_and_grads, mlp_forward

logger = logging.getLogger(__name__)
events = get_event_logger(__name__)

SUPPORTED_WIDTHS = (16, 32, 64, 128, 256)
CONSTRAINED_NORM = 20.0
CHECKPOINT_VERSION = 1


class NormConstraint(str, Enum):
    NONE = "none"
    EMB20 = "emb20"
    UNEMB20 = "unemb20"
    BOTH20 = "both20"


class TrainConfig(BaseModel):
    width: int = Field(64, description="Hidden layer size")
    depth: int = Field(3, ge=1, description="Number of hidden LeakyReLU layers")
    dim: int = Field(2, ge=1, description="Representation dimension M")
    batch: int = Field(128, ge=1)
    steps: int = Field(15000, gt=0)
    lr: float = Field(1e-3, ge=0.0, description="Adam learning rate")
    beta1: float = Field(0.9, ge=0.0, lt=1.0)
    beta2: float = Field(0.999, ge=0.0, lt=1.0)
    eps: float = Field(1e-8, gt=0.0)
    leaky_slope: float = Field(0.01, ge=0.0, description="LeakyReLU negative slope")
    seed: int = 0
    norm_constraint: NormConstraint = NormConstraint.NONE
    train_fraction: float = Field(0.8, gt=0.0, lt=1.0)
    eval_every: int = Field(500, ge=1, description="Steps between full training-loss evaluations")

    @field_validator("width")
    @classmethod
    def _check_width(cls, width: int) -> int:
        if width not in SUPPORTED_WIDTHS:
            raise ValueError(f"width must be one of {SUPPORTED_WIDTHS}, got {width}")
        return width

    @property
    def emb_norm(self) -> Optional[float]:
        if self.norm_constraint in (NormConstraint.EMB20, NormConstraint.BOTH20):
            return CONSTRAINED_NORM
        return None

    @property
    def unemb_norm(self) -> Optional[float]:
        if self.norm_constraint in (NormConstraint.UNEMB20, NormConstraint.BOTH20):
            return CONSTRAINED_NORM
        return None


def renormalize_rows(matrix: np.ndarray, norm: float) -> None:
    """Scale every row of matrix in place to the given Euclidean norm."""
    matrix *= norm / np.maximum(np.linalg.norm(matrix, axis=1, keepdims=True), 1e-12)


@dataclass
class TrainedModel:
    params: MlpParams
    config: TrainConfig
    c: int
    loss_curve: List[Tuple[int, float]] = field(default_factory=list)
    accuracy: float = 0.0

    def embed(self, points: np.ndarray) -> np.ndarray:
        return mlp_forward(self.params, points, self.config.leaky_slope, self.config.emb_norm)

    def predict(self, points: np.ndarray) -> np.ndarray:
        return np.argmax(self.embed(points) @ self.params.unembedding.T, axis=1)

    def retained(self, threshold: float = 0.9) -> bool:
        return self.accuracy > threshold

    def to_model_table(self, points: np.ndarray, weights: Optional[np.ndarray] = None) -> ModelTable:
        """Evaluate the network on a grid of inputs."""
        return ModelTable(self.embed(points), self.params.unembedding, input_weights=weights)

    def to_dict(self) -> dict:
        return {
            "version": CHECKPOINT_VERSION,
            "c": self.c,
            "config": self.config.model_dump(mode="json"),
            "params": self.params.to_dict(),
            "loss_curve": [[step, loss] for step, loss in self.loss_curve],
            "accuracy": self.accuracy,
        }

    def save(self, path: Path) -> None:
        Path(path).write_text(json.dumps(self.to_dict()))

    @classmethod
    def load(cls, path: Path) -> "TrainedModel":
        raw = json.loads(Path(path).read_text())
        missing = [key for key in ("c", "config", "params", "accuracy") if key not in raw]
        if missing:
            raise SchemaMismatchError(f"checkpoint lacks {missing}", missing_fields(missing, "checkpoint"))
        return cls(
            params=MlpParams.from_dict(raw["params"]),
            config=TrainConfig.model_validate(raw["config"]),
            c=int(raw["c"]),
            loss_curve=[(int(step), float(loss)) for step, loss in raw.get("loss_curve", [])],
            accuracy=float(raw["accuracy"]),
        )


def train(config: TrainConfig, data: AngularDataset) -> TrainedModel:
    """
    Adam on the batch cross-entropy with epoch shuffling.

    The held-out share of the data (1 - train_fraction) is used only for the
    final accuracy. Unembedding rows are renormalized after every step when
    the constraint asks for it; the embedding constraint is part of the forward pass.

    Raises:
        TrainingDivergenceError: when the loss or the activations stop being finite
    """
    train_idx, test_idx = data.split(config.train_fraction, config.seed)
    x_train, y_train = data.points[train_idx], data.labels[train_idx]
    rng = np.random.default_rng((config.seed, 1))

    params = init_params(config.width, data.c, config.dim, config.depth, config.seed)
    if config.unemb_norm is not None:
        renormalize_rows(params.unembedding, config.unemb_norm)
    optimizer = Adam(params.arrays(), config.lr, config.beta1, config.beta2, config.eps)

    def full_loss(step: int) -> float:
        try:
            value = cross_entropy(params, x_train, y_train, config.leaky_slope, config.emb_norm)
        except NonFiniteError as exc:
            raise TrainingDivergenceError(f"training diverged: {exc}", seed=config.seed, step=step) from exc
        if not np.isfinite(value):
            raise TrainingDivergenceError(f"loss became {value} (width={config.width})", seed=config.seed, step=step)
        return value

    curve = [(0, full_loss(0))]
    order = rng.permutation(len(train_idx))
    cursor = 0
    with timed("train", {"width": str(config.width)}):
        for step in range(1, config.steps + 1):
            if cursor + config.batch > len(order):
                order = rng.permutation(len(train_idx))
                cursor = 0
            batch = order[cursor : cursor + config.batch]
            cursor += config.batch
            try:
                loss, grads = loss_and_grads(
                    params, x_train[batch], y_train[batch], config.leaky_slope, config.emb_norm, step
                )
            except NonFiniteError as exc:
                raise TrainingDivergenceError(f"training diverged: {exc}", seed=config.seed, step=step) from exc
            if not np.isfinite(loss):
                raise TrainingDivergenceError(f"loss became {loss} (width={config.width})", seed=config.seed, step=step)
            optimizer.step(params.arrays(), grads.arrays())
            if config.unemb_norm is not None:
                renormalize_rows(params.unembedding, config.unemb_norm)
            if step % config.eval_every == 0 or step == config.steps:
                curve.append((step, full_loss(step)))

    model = TrainedModel(params=params, config=config, c=data.c, loss_curve=curve)
    model.accuracy = float(np.mean(model.predict(data.points[test_idx]) == data.labels[test_idx]))
    increment_metric("models_trained")
    events.info(
        "trained",
        seed=config.seed,
        width=config.width,
        c=data.c,
        first_loss=curve[0][1],
        final_loss=curve[-1][1],
        accuracy=model.accuracy,
    )
    return model
