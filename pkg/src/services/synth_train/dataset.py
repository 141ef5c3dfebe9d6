"""
Angular-slice classification data.

Points are drawn from an isotropic Gaussian and labelled by their angle to
the first axis: the circle is cut into 2c slices of width pi/c and each label
owns one slice together with the opposite one.
"""
import json
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Tuple

import numpy as np

from ...core.exceptions import ModelTableError, SchemaMismatchError
from ...models.reports import Diagnostic, missing_fields

logger = logging.getLogger(__name__)

DEFAULT_CLASS_COUNTS = (4, 6, 10, 18)


def slice_label(points: np.ndarray, c: int) -> np.ndarray:
    """Label floor((theta mod pi) / (pi / c)); opposite points share a label."""
    theta = np.mod(np.arctan2(points[:, 1], points[:, 0]), np.pi)
    return np.minimum((theta // (np.pi / c)).astype(int), c - 1)


@dataclass(frozen=True)
class AngularDataset:
    points: np.ndarray
    labels: np.ndarray
    c: int
    sigma: float
    seed: int

    @property
    def n(self) -> int:
        return self.points.shape[0]

    def split(self, train_fraction: float = 0.8, seed: int = 0) -> Tuple[np.ndarray, np.ndarray]:
        """Shuffled train and held-out index arrays."""
        order = np.random.default_rng(seed).permutation(self.n)
        cut = int(round(train_fraction * self.n))
        return order[:cut], order[cut:]

    def to_dict(self) -> dict:
        return {
            "c": self.c,
            "sigma": self.sigma,
            "seed": self.seed,
            "points": self.points.tolist(),
            "labels": self.labels.tolist(),
        }

    def save(self, path: Path) -> None:
        Path(path).write_text(json.dumps(self.to_dict()))

    @classmethod
    def load(cls, path: Path) -> "AngularDataset":
        try:
            raw = json.loads(Path(path).read_text())
        except json.JSONDecodeError as exc:
            raise SchemaMismatchError(
                f"{path} is not valid JSON: {exc}", [Diagnostic(level="error", category="schema", message=str(exc))]
            ) from exc
        missing = [key for key in ("c", "sigma", "seed", "points", "labels") if key not in raw]
        if missing:
            raise SchemaMismatchError(f"dataset file lacks {missing}", missing_fields(missing, "dataset file"))
        points = np.asarray(raw["points"], dtype=float)
        labels = np.asarray(raw["labels"], dtype=int)
        if points.ndim != 2 or points.shape[1] != 2 or labels.shape != (points.shape[0],):
            raise SchemaMismatchError(
                "points must be n x 2 with one label each",
                [Diagnostic(level="error", category="schema", message="points must be n x 2 with one label each", field="points")],
            )
        return cls(points, labels, int(raw["c"]), float(raw["sigma"]), int(raw["seed"]))


def gen_angular_data(c: int, n: int = 20000, sigma: float = 3.0, seed: int = 0) -> AngularDataset:
    """Sample n Gaussian points with scale sigma and label them by the slice rule."""
    if c < 2 or c % 2:
        raise ModelTableError(f"class count must be even, got {c}")
    if n < 1 or sigma <= 0:
        raise ModelTableError("n and sigma must be positive")
    points = np.random.default_rng(seed).normal(0.0, sigma, size=(n, 2))
    labels = slice_label(points, c)
    logger.info(f"Generated {n} points for c={c} (sigma={sigma}, seed={seed})")
    return AngularDataset(points, labels, c, sigma, seed)
