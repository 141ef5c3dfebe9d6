"""
Tests for the error terms, the variance-correlation identity and the bound verifier.
"""
import numpy as np
import pytest

from src.core.exceptions import AssumptionViolationError
from src.models.tables import ModelPair, ModelTable, default_pivots
from src.services.bound_lab import (
    embedding_alignment,
    epsilon_x_matrix,
    epsilon_x_vector,
    epsilon_y_matrix,
    epsilon_y_vector,
    unembedding_alignment,
    var_corr_identity,
    verify_bound,
)
from src.services.constructions import DEFAULT_SIGMAS, default_reference_model, perturbation_sweep
from src.services.model_core import apply_equivalence

from .conftest import random_model


@pytest.fixture
def pair(model, other_model):
    return ModelPair(model, other_model)


class TestReconstruction:
    @pytest.mark.parametrize("seed", range(100))
    def test_embeddings(self, seed, pivots):
        pair = ModelPair(random_model(seed=2 * seed), random_model(seed=2 * seed + 1))
        alignment = embedding_alignment(pair, pivots)
        rebuilt = pair.second.embeddings @ alignment.matrix.T + alignment.offsets
        assert np.allclose(rebuilt, pair.first.embeddings, atol=1e-8)

    @pytest.mark.parametrize("seed", range(100))
    def test_unembeddings(self, seed, pivots):
        pair = ModelPair(random_model(seed=2 * seed), random_model(seed=2 * seed + 1))
        alignment = unembedding_alignment(pair, pivots)
        rebuilt = pair.second.unembeddings @ alignment.matrix.T + alignment.offsets
        assert np.allclose(rebuilt, pair.first.unembeddings, atol=1e-8)

    def test_equivalent_models_have_no_error(self, model, pivots):
        A = np.array([[1.5, 0.3], [-0.2, 0.8]])
        pair = ModelPair(model, apply_equivalence(model, A))
        assert np.max(np.abs(epsilon_y_matrix(pair, pivots))) < 1e-10
        assert np.max(np.abs(epsilon_x_matrix(pair, pivots))) < 1e-10
        alignment = embedding_alignment(pair, pivots)
        assert np.allclose(alignment.matrix, A, atol=1e-8)
        assert np.allclose(alignment.offsets, 0.0, atol=1e-8)

    def test_error_shapes(self, pair, pivots):
        assert epsilon_y_matrix(pair, pivots).shape == (40, 2)
        assert epsilon_x_matrix(pair, pivots).shape == (6, 2)
        assert epsilon_x_vector(pair, pivots, 1).shape == (2,)
        assert epsilon_y_vector(pair, pivots, 3).shape == (2,)

    def test_vanished_psi(self):
        flat = ModelTable(np.zeros((5, 2)), np.random.default_rng(0).normal(size=(4, 2)))
        pair = ModelPair(random_model(n=5, k=4), flat)
        with pytest.raises(AssumptionViolationError):
            embedding_alignment(pair, default_pivots(5, 4, 2))


class TestVarCorrIdentity:
    @pytest.mark.parametrize("seed", range(100))
    def test_identity_is_exact(self, seed, pivots):
        pair = ModelPair(random_model(seed=seed), random_model(seed=seed + 1000))
        components = var_corr_identity(pair, pivots)
        assert len(components) == 4
        assert {c.side for c in components} == {"embedding", "unembedding"}
        assert max(c.gap for c in components) < 1e-8

    def test_component_indices(self, pair, pivots):
        components = var_corr_identity(pair, pivots)
        assert [c.index for c in components if c.side == "embedding"] == [1, 2]
        assert [c.index for c in components if c.side == "unembedding"] == pivots.x_llv


class TestVerifyBound:
    @pytest.mark.parametrize("seed", range(10))
    def test_holds_for_random_pairs(self, seed, pivots):
        pair = ModelPair(random_model(seed=seed), random_model(seed=seed + 100))
        certificate = verify_bound(pair, pivots)
        assert certificate.holds is True
        assert certificate.lhs <= certificate.rhs + 1e-9
        assert certificate.rhs == pytest.approx(4 * certificate.epsilon)
        assert certificate.interior_emb.holds
        assert certificate.interior_unemb.holds

    def test_equivalent_models(self, model, pivots):
        pair = ModelPair(model, apply_equivalence(model, np.array([[0.0, 2.0], [-1.0, 0.5]])))
        certificate = verify_bound(pair, pivots)
        assert certificate.holds is True
        assert certificate.epsilon < 1e-8
        assert certificate.lhs < 1e-9
        assert not certificate.vacuous
        assert certificate.preconditions_met

    def test_singular_projection_leaves_holds_undefined(self, model, pivots):
        unembeddings = np.array(model.unembeddings)
        unembeddings[2] = 2 * unembeddings[1] - unembeddings[0]
        degenerate = model.with_unembeddings(unembeddings)
        certificate = verify_bound(ModelPair(model, degenerate), pivots)
        assert certificate.holds is None
        assert certificate.lhs is None
        assert certificate.llv is None
        assert certificate.diagnostics[0].category == "diversity"

    def test_column_resamples(self, pair, pivots):
        certificate = verify_bound(pair, pivots, n_column_resamples=6, seed=3)
        assert certificate.n_column_resamples == 6
        assert certificate.resampled_lhs_emb_max is not None
        assert 0.0 <= certificate.resampled_lhs_emb_max <= 1.0

    def test_lambda_is_forwarded(self, pair, pivots):
        assert verify_bound(pair, pivots, lam=0.25).llv.lam == 0.25


class TestPerturbationSweep:
    def test_bound_holds_at_every_noise_level(self):
        reference = default_reference_model(seed=0, k=6, rho=4.0, points_per_label=15)
        records = perturbation_sweep(reference, [0.1, 0.0, 0.05, 0.2], seed=0, n_input_sets=30)
        assert [r.param for r in records] == [0.0, 0.05, 0.1, 0.2]
        assert all(r.holds is True for r in records)
        assert records[0].epsilon == pytest.approx(0.0, abs=1e-12)
        assert max(records[0].lhs_emb, records[0].lhs_unemb) < 1e-9

    def test_lhs_grows_with_noise(self):
        reference = default_reference_model(seed=1, k=6, rho=4.0, points_per_label=15)
        records = perturbation_sweep(reference, [0.0, 0.3], seed=1, n_input_sets=30)
        assert records[1].lhs_emb > records[0].lhs_emb
        assert records[1].epsilon > records[0].epsilon

    def test_default_sweep_grows_with_noise(self):
        reference = default_reference_model(seed=0, k=6, rho=4.0, points_per_label=15)
        records = perturbation_sweep(reference, DEFAULT_SIGMAS, seed=0, n_input_sets=30)
        assert len(records) == 10
        assert all(r.holds is True for r in records)
        for values in ([r.epsilon for r in records], [r.lhs_emb for r in records]):
            inversions = sum(b < a for a, b in zip(values, values[1:]))
            assert inversions <= 1
            assert values[-1] > values[0]
