"""
Embedding network x -> R^M with a free unembedding matrix, and exact gradients
of the softmax cross-entropy of the logits f(x)^T g(y).
"""
import logging
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np
from scipy.special import logsumexp, softmax

from ...core.exceptions import NonFiniteError

logger = logging.getLogger(__name__)


@dataclass
class MlpParams:
    """Layer weights and biases of the embedding network plus the c x M unembedding."""

    weights: List[np.ndarray]
    biases: List[np.ndarray]
    unembedding: np.ndarray

    def arrays(self) -> List[np.ndarray]:
        """All parameter arrays in a fixed order; the optimizer updates them in place."""
        return [*self.weights, *self.biases, self.unembedding]

    def copy(self) -> "MlpParams":
        return MlpParams([w.copy() for w in self.weights], [b.copy() for b in self.biases], self.unembedding.copy())

    @property
    def width(self) -> int:
        return self.weights[0].shape[1]

    @property
    def dim(self) -> int:
        return self.unembedding.shape[1]

    def to_dict(self) -> dict:
        return {
            "weights": [w.tolist() for w in self.weights],
            "biases": [b.tolist() for b in self.biases],
            "unembedding": self.unembedding.tolist(),
        }

    @classmethod
    def from_dict(cls, raw: dict) -> "MlpParams":
        return cls(
            [np.asarray(w, dtype=float) for w in raw["weights"]],
            [np.asarray(b, dtype=float) for b in raw["biases"]],
            np.asarray(raw["unembedding"], dtype=float),
        )


def init_params(width: int, c: int, dim: int = 2, depth: int = 3, seed: int = 0, input_dim: int = 2) -> MlpParams:
    """He-normal layer weights, zero biases, standard-normal unembeddings."""
    rng = np.random.default_rng(seed)
    sizes = [input_dim] + [width] * depth + [dim]
    weights = [rng.normal(0.0, np.sqrt(2.0 / fan_in), size=(fan_in, fan_out)) for fan_in, fan_out in zip(sizes, sizes[1:])]
    biases = [np.zeros(fan_out) for fan_out in sizes[1:]]
    return MlpParams(weights, biases, rng.normal(size=(c, dim)))


def zero_params(width: int, c: int, dim: int = 2, depth: int = 3, input_dim: int = 2) -> MlpParams:
    sizes = [input_dim] + [width] * depth + [dim]
    return MlpParams(
        [np.zeros((a, b)) for a, b in zip(sizes, sizes[1:])],
        [np.zeros(b) for b in sizes[1:]],
        np.zeros((c, dim)),
    )


def leaky_relu(x: np.ndarray, slope: float) -> np.ndarray:
    return np.where(x > 0, x, slope * x)


@dataclass
class _Cache:
    activations: List[np.ndarray]
    preactivations: List[np.ndarray]
    raw: np.ndarray
    norms: Optional[np.ndarray]
    embeddings: np.ndarray


def _forward(
    params: MlpParams, x: np.ndarray, slope: float, emb_norm: Optional[float], step: Optional[int]
) -> _Cache:
    activations, preactivations = [x], []
    h = x
    for W, b in zip(params.weights[:-1], params.biases[:-1]):
        z = h @ W + b
        preactivations.append(z)
        h = leaky_relu(z, slope)
        activations.append(h)
    raw = h @ params.weights[-1] + params.biases[-1]
    if not np.all(np.isfinite(raw)):
        where = f" at step {step}" if step is not None else ""
        raise NonFiniteError(f"non-finite activations{where}", step=step)
    norms = None
    embeddings = raw
    if emb_norm is not None:
        norms = np.maximum(np.linalg.norm(raw, axis=1, keepdims=True), 1e-12)
        embeddings = emb_norm * raw / norms
    return _Cache(activations, preactivations, raw, norms, embeddings)


def mlp_forward(
    params: MlpParams, x: np.ndarray, slope: float = 0.01, emb_norm: Optional[float] = None, step: Optional[int] = None
) -> np.ndarray:
    """Embeddings f(x): three LeakyReLU hidden layers, then a linear map to R^M."""
    return _forward(params, np.asarray(x, dtype=float), slope, emb_norm, step).embeddings


def cross_entropy(
    params: MlpParams, x: np.ndarray, labels: np.ndarray, slope: float = 0.01, emb_norm: Optional[float] = None
) -> float:
    logits = mlp_forward(params, x, slope, emb_norm) @ params.unembedding.T
    return float(np.mean(logsumexp(logits, axis=1) - logits[np.arange(len(labels)), labels]))


def loss_and_grads(
    params: MlpParams,
    x: np.ndarray,
    labels: np.ndarray,
    slope: float = 0.01,
    emb_norm: Optional[float] = None,
    step: Optional[int] = None,
) -> Tuple[float, MlpParams]:
    """Mean cross-entropy of the batch and its exact gradient with respect to every parameter."""
    x = np.asarray(x, dtype=float)
    cache = _forward(params, x, slope, emb_norm, step)
    batch = x.shape[0]
    rows = np.arange(batch)
    logits = cache.embeddings @ params.unembedding.T
    loss = float(np.mean(logsumexp(logits, axis=1) - logits[rows, labels]))

    dlogits = softmax(logits, axis=1)
    dlogits[rows, labels] -= 1.0
    dlogits /= batch

    d_unembedding = dlogits.T @ cache.embeddings
    d_emb = dlogits @ params.unembedding
    if emb_norm is not None:
        unit = cache.raw / cache.norms
        radial = np.sum(d_emb * unit, axis=1, keepdims=True)
        d_raw = (emb_norm / cache.norms) * (d_emb - radial * unit)
    else:
        d_raw = d_emb

    n_layers = len(params.weights)
    d_weights: List[np.ndarray] = [None] * n_layers
    d_biases: List[np.ndarray] = [None] * n_layers
    d_weights[-1] = cache.activations[-1].T @ d_raw
    d_biases[-1] = d_raw.sum(axis=0)
    upstream = d_raw @ params.weights[-1].T
    for layer in range(n_layers - 2, -1, -1):
        dz = upstream * np.where(cache.preactivations[layer] > 0, 1.0, slope)
        d_weights[layer] = cache.activations[layer].T @ dz
        d_biases[layer] = dz.sum(axis=0)
        upstream = dz @ params.weights[layer].T
    return loss, MlpParams(d_weights, d_biases, d_unembedding)


def mlp_backward(
    params: MlpParams, x: np.ndarray, labels: np.ndarray, slope: float = 0.01, emb_norm: Optional[float] = None
) -> MlpParams:
    return loss_and_grads(params, x, labels, slope, emb_norm)[1]


def gradient_check(
    params: MlpParams,
    x: np.ndarray,
    labels: np.ndarray,
    n_coords: int = 20,
    h: float = 1e-6,
    seed: int = 0,
    slope: float = 0.01,
    emb_norm: Optional[float] = None,
    floor: float = 1e-3,
) -> float:
    """
    Largest relative error between analytic gradients and central differences
    over randomly chosen parameter coordinates.

    The relative error is |a - n| / max(|a| + |n|, floor).
    """
    params = params.copy()
    _, grads = loss_and_grads(params, x, labels, slope, emb_norm)
    arrays, grad_arrays = params.arrays(), grads.arrays()
    sizes = np.array([a.size for a in arrays])
    offsets = np.concatenate([[0], np.cumsum(sizes)])
    rng = np.random.default_rng(seed)
    worst = 0.0
    for flat in rng.choice(offsets[-1], size=min(n_coords, offsets[-1]), replace=False):
        which = int(np.searchsorted(offsets, flat, side="right") - 1)
        index = int(flat - offsets[which])
        target = arrays[which].reshape(-1)
        original = target[index]
        target[index] = original + h
        plus = cross_entropy(params, x, labels, slope, emb_norm)
        target[index] = original - h
        minus = cross_entropy(params, x, labels, slope, emb_norm)
        target[index] = original
        numeric = (plus - minus) / (2 * h)
        analytic = grad_arrays[which].reshape(-1)[index]
        worst = max(worst, abs(analytic - numeric) / max(abs(analytic) + abs(numeric), floor))
    return worst
