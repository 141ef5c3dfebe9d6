"""
Shared fixtures: random model tables and constructed pairs.
"""
import numpy as np
import pytest

from src.models.tables import ModelTable, default_pivots
from src.services.constructions import build_circle_pair, build_theorem_pair


def random_model(n: int = 40, k: int = 6, dim: int = 2, seed: int = 0, scale: float = 1.0) -> ModelTable:
    rng = np.random.default_rng(seed)
    return ModelTable(scale * rng.normal(size=(n, dim)), scale * rng.normal(size=(k, dim)))


def random_weights(n: int, seed: int = 0) -> np.ndarray:
    weights = np.random.default_rng(seed).uniform(0.5, 1.5, n)
    return weights / weights.sum()


@pytest.fixture
def model_factory():
    return random_model


@pytest.fixture
def model():
    return random_model(n=40, k=6, dim=2, seed=0)


@pytest.fixture
def other_model():
    return random_model(n=40, k=6, dim=2, seed=1)


@pytest.fixture
def pivots():
    return default_pivots(40, 6, 2)


@pytest.fixture
def circle_pair():
    return build_circle_pair(k=5, rho=18.0, points_per_label=20)


@pytest.fixture
def theorem_pair():
    return build_theorem_pair(dim=2, k=4, rho=18.0)
