"""
Tests for the angular-slice data, the embedding network, training and the width sweep.
"""
import numpy as np
import pytest
from pydantic import ValidationError

from src import __version__
from src.core.exceptions import ModelTableError, SchemaMismatchError, TrainingDivergenceError
from src.models.reports import WidthSweepRow
from src.models.samples import SampleMatrix
from src.services.constructions import cluster_labels, default_reference_model, perturb_embeddings, table1_family
from src.services.metrics import d_llv, m_cca, select_group_pivots, select_pivots
from src.services.model_core import assigned_labels, cond_log_probs
from src.services.synth_train import (
    PROFILES,
    Adam,
    AngularDataset,
    MlpParams,
    NormConstraint,
    TrainConfig,
    TrainedModel,
    compare_group,
    cross_entropy,
    evaluation_grid,
    find_permuted_pairs,
    gen_angular_data,
    gradient_check,
    init_params,
    loss_and_grads,
    mlp_backward,
    mlp_forward,
    renormalize_rows,
    slice_label,
    summarize_width,
    train,
    unembedding_order,
    width_sweep,
    width_trend_spearman,
    zero_params,
)


@pytest.fixture(scope="module")
def small_data():
    return gen_angular_data(4, n=400, seed=0)


def _with_unembedding(unembedding, seed=0) -> TrainedModel:
    params = init_params(16, len(unembedding), seed=seed)
    params.unembedding = np.asarray(unembedding, dtype=float)
    return TrainedModel(params=params, config=TrainConfig(width=16, seed=seed), c=len(unembedding), accuracy=1.0)


class TestDataset:
    def test_slice_directions(self):
        angles = np.deg2rad(22.5 + 45.0 * np.arange(4))
        points = np.column_stack([np.cos(angles), np.sin(angles)])
        assert slice_label(points, 4).tolist() == [0, 1, 2, 3]

    def test_opposite_points_share_labels(self):
        points = np.random.default_rng(0).normal(size=(200, 2))
        assert np.array_equal(slice_label(points, 6), slice_label(-points, 6))

    @pytest.mark.parametrize("c", [4, 6, 10])
    def test_balanced_classes(self, c):
        data = gen_angular_data(c, n=20000, seed=1)
        shares = np.bincount(data.labels, minlength=c) / data.n
        assert np.all(np.abs(shares - 1.0 / c) < 0.03)

    def test_odd_class_count(self):
        with pytest.raises(ModelTableError):
            gen_angular_data(5)

    def test_deterministic(self):
        assert np.array_equal(gen_angular_data(4, 100, seed=3).points, gen_angular_data(4, 100, seed=3).points)

    def test_split(self, small_data):
        train_idx, test_idx = small_data.split(0.8, seed=0)
        assert len(train_idx) == 320
        assert len(test_idx) == 80
        assert set(train_idx).isdisjoint(test_idx)

    def test_file_round_trip(self, small_data, tmp_path):
        path = tmp_path / "data.json"
        small_data.save(path)
        loaded = AngularDataset.load(path)
        assert loaded.c == 4
        assert np.array_equal(loaded.labels, small_data.labels)

    def test_incomplete_file(self, tmp_path):
        path = tmp_path / "data.json"
        path.write_text('{"c": 4, "points": []}')
        with pytest.raises(SchemaMismatchError) as info:
            AngularDataset.load(path)
        assert [d.field for d in info.value.diagnostics] == ["sigma", "seed", "labels"]


class TestNetwork:
    @pytest.mark.parametrize("emb_norm", [None, 20.0])
    def test_gradients(self, emb_norm):
        params = init_params(6, 4, seed=2)
        x = np.random.default_rng(3).normal(size=(4, 2))
        labels = np.array([0, 1, 2, 3])
        assert gradient_check(params, x, labels, n_coords=40, emb_norm=emb_norm) < 1e-5

    def test_zero_parameters_give_uniform_loss(self):
        params = zero_params(16, 6)
        x = np.random.default_rng(0).normal(size=(10, 2))
        assert cross_entropy(params, x, np.zeros(10, dtype=int)) == pytest.approx(np.log(6))

    def test_unit_slope_is_affine(self):
        params = init_params(16, 4, seed=1)
        a, b = np.random.default_rng(2).normal(size=(2, 1, 2))
        mixed = mlp_forward(params, 0.3 * a + 0.7 * b, slope=1.0)
        assert np.allclose(mixed, 0.3 * mlp_forward(params, a, slope=1.0) + 0.7 * mlp_forward(params, b, slope=1.0))

    def test_embedding_norm_layer(self):
        params = init_params(16, 4, seed=1)
        emb = mlp_forward(params, np.random.default_rng(0).normal(size=(30, 2)), emb_norm=20.0)
        assert np.allclose(np.linalg.norm(emb, axis=1), 20.0)

    def test_loss_matches_cross_entropy(self):
        params = init_params(16, 4, seed=4)
        x = np.random.default_rng(5).normal(size=(8, 2))
        labels = np.arange(8) % 4
        loss, grads = loss_and_grads(params, x, labels)
        assert loss == pytest.approx(cross_entropy(params, x, labels))
        assert [g.shape for g in grads.arrays()] == [p.shape for p in params.arrays()]
        backward = mlp_backward(params, x, labels)
        assert all(np.array_equal(a, b) for a, b in zip(grads.arrays(), backward.arrays()))

    def test_params_round_trip(self):
        params = init_params(16, 4, seed=6)
        restored = MlpParams.from_dict(params.to_dict())
        assert all(np.array_equal(a, b) for a, b in zip(params.arrays(), restored.arrays()))


class TestAdam:
    def test_first_step(self):
        param = np.array([1.0])
        Adam([param], lr=0.1).step([param], [np.array([0.5])])
        assert param[0] == pytest.approx(0.9, abs=1e-7)

    def test_zero_gradient_leaves_params(self):
        param = np.array([1.0, -2.0])
        optimizer = Adam([param])
        for _ in range(3):
            optimizer.step([param], [np.zeros(2)])
        assert param.tolist() == [1.0, -2.0]


class TestTraining:
    def test_unsupported_width(self):
        with pytest.raises(ValidationError):
            TrainConfig(width=48)

    def test_zero_learning_rate(self, small_data):
        config = TrainConfig(width=16, steps=10, lr=0.0, eval_every=5, batch=32)
        initial = init_params(16, 4, seed=0)
        model = train(config, small_data)
        losses = [loss for _, loss in model.loss_curve]
        assert [step for step, _ in model.loss_curve] == [0, 5, 10]
        assert max(losses) - min(losses) == 0.0
        assert all(np.array_equal(a, b) for a, b in zip(initial.arrays(), model.params.arrays()))

    def test_deterministic(self, small_data):
        config = TrainConfig(width=16, steps=20, batch=32, seed=7)
        a, b = train(config, small_data), train(config, small_data)
        assert all(np.array_equal(x, y) for x, y in zip(a.params.arrays(), b.params.arrays()))
        assert a.loss_curve == b.loss_curve

    @pytest.mark.parametrize("constraint", [NormConstraint.EMB20, NormConstraint.UNEMB20, NormConstraint.BOTH20])
    def test_norm_constraints(self, small_data, constraint):
        config = TrainConfig(width=16, steps=20, batch=32, norm_constraint=constraint)
        model = train(config, small_data)
        if config.unemb_norm is not None:
            assert np.allclose(np.linalg.norm(model.params.unembedding, axis=1), 20.0, atol=1e-9)
        if config.emb_norm is not None:
            assert np.allclose(np.linalg.norm(model.embed(small_data.points), axis=1), 20.0, atol=1e-9)

    def test_renormalize_rows(self):
        matrix = np.array([[3.0, 4.0], [0.0, 2.0]])
        renormalize_rows(matrix, 10.0)
        assert np.allclose(np.linalg.norm(matrix, axis=1), 10.0)

    def test_divergence_reports_seed_and_step(self, small_data):
        config = TrainConfig(width=16, steps=5, lr=1e100, seed=3, eval_every=1000, batch=32)
        with np.errstate(all="ignore"):
            with pytest.raises(TrainingDivergenceError) as info:
                train(config, small_data)
        assert info.value.seed == 3
        assert 1 <= info.value.step <= 5
        assert "seed=3" in str(info.value)

    def test_learns_slices(self):
        data = gen_angular_data(4, n=4000, seed=0)
        model = train(TrainConfig(width=64, steps=5000, seed=0), data)
        assert model.loss_curve[-1][1] < model.loss_curve[0][1]
        assert model.accuracy > 0.9

    def test_checkpoint_round_trip(self, small_data, tmp_path):
        model = train(TrainConfig(width=16, steps=5, batch=32), small_data)
        path = tmp_path / "model.json"
        model.save(path)
        loaded = TrainedModel.load(path)
        assert loaded.accuracy == model.accuracy
        assert loaded.config == model.config
        assert np.array_equal(loaded.predict(small_data.points), model.predict(small_data.points))

    def test_model_table(self, small_data):
        model = train(TrainConfig(width=16, steps=5, batch=32), small_data)
        table = model.to_model_table(small_data.points[:50])
        assert (table.n, table.k, table.dim) == (50, 4, 2)


class TestUnembeddingOrder:
    def test_canonical_order(self):
        counterclockwise = _with_unembedding([[1, 0], [0, 1], [-1, 0], [0, -1]])
        clockwise = _with_unembedding([[1, 0], [0, -1], [-1, 0], [0, 1]])
        crossed = _with_unembedding([[1, 0], [-1, 0], [0, 1], [0, -1]])
        assert unembedding_order(counterclockwise) == (0, 1, 2, 3)
        assert unembedding_order(clockwise) == (0, 1, 2, 3)
        assert unembedding_order(crossed) == (0, 2, 1, 3)

    def test_planar_only(self):
        model = _with_unembedding(np.eye(4)[:, :3])
        with pytest.raises(ModelTableError):
            unembedding_order(model)

    def test_permuted_pairs(self):
        models = [
            _with_unembedding([[1, 0], [0, 1], [-1, 0], [0, -1]], seed=0),
            _with_unembedding([[1, 0], [-1, 0], [0, 1], [0, -1]], seed=1),
        ]
        found = find_permuted_pairs(models, evaluation_grid(4, 300), n_input_sets=20)
        assert len(found) == 1
        assert found[0].order_a != found[0].order_b
        assert 0.0 <= found[0].m_cca <= 1.0 + 1e-9


class TestSweepSummaries:
    def test_summarize_width(self):
        row = summarize_width(4, 64, 5, [1.0, 3.0], [0.2])
        assert (row.mean_d_llv, row.std_d_llv) == (2.0, 1.0)
        assert row.mean_max_d_svd == 0.2
        assert row.std_max_d_svd is None
        empty = summarize_width(4, 16, 1, [], [])
        assert empty.mean_d_llv is None and empty.std_d_llv is None

    def test_spearman(self):
        rows = [summarize_width(4, w, 5, [m], [0.5]) for w, m in [(16, 3.0), (32, 2.0), (64, 1.0)]]
        assert width_trend_spearman(rows) == pytest.approx(-1.0)
        assert width_trend_spearman(rows[:1]) is None
        assert width_trend_spearman([WidthSweepRow(c=4, width=16, n_retained=0, mean_d_llv=None, std_d_llv=None, mean_max_d_svd=None, std_max_d_svd=None)]) is None

    def test_compare_group(self):
        reference = default_reference_model(points_per_label=10)
        tables = [perturb_embeddings(reference, 0.05, seed) for seed in range(3)]
        llv, svd, diagnostics, pivots = compare_group(tables, n_input_sets=20)
        assert pivots == select_group_pivots([cond_log_probs(t) for t in tables], dim=2, n_input_sets=20)
        assert len(llv) + len([d for d in diagnostics if d.category == "pair"]) == 3
        assert len(llv) == len(svd)

    def test_insufficient_retention(self):
        result = width_sweep(4, [16], [0, 1], steps=5, n_data=400, n_eval=200, num_workers=1)
        assert result.rows[0].n_retained <= 2
        assert result.rows[0].mean_d_llv is None
        assert result.spearman is None
        assert [d.category for d in result.diagnostics] == ["retention"]
        assert result.version == __version__
        assert (result.config["widths"], result.config["seeds"], result.config["steps"]) == ([16], [0, 1], 5)

    def test_constructed_permuted_pair_is_dissimilar(self):
        first, second = table1_family().build_pair(3.0)
        labels = cluster_labels(7, 40)
        assert np.mean(assigned_labels(first) == labels) > 0.9
        assert np.mean(assigned_labels(second) == labels) > 0.9
        p, q = cond_log_probs(first), cond_log_probs(second)
        pivots = select_pivots(p, q, dim=2, n_input_sets=50)
        assert d_llv(p, q, pivots).value > 0.5
        assert m_cca(SampleMatrix(first.embeddings, first.weights()), SampleMatrix(second.embeddings, second.weights())) < 0.9


@pytest.mark.slow
def test_width_sweep_retains_trained_models():
    result = width_sweep(4, [64], list(range(6)), steps=10000, min_retained=4, retention=0.9, num_workers=1)
    assert result.rows[0].n_retained >= 4
    assert result.rows[0].mean_d_llv is not None
    assert not [d for d in result.diagnostics if d.category == "retention"]


@pytest.mark.slow
def test_wider_networks_agree_more():
    profile = PROFILES["ci"]
    result = width_sweep(4, profile.widths, list(range(profile.n_seeds)), steps=profile.steps, min_retained=3, retention=0.9)
    narrow, wide = result.rows
    assert narrow.mean_d_llv is not None and wide.mean_d_llv is not None
    assert wide.mean_d_llv < narrow.mean_d_llv


@pytest.mark.slow
def test_trained_permuted_pairs_are_dissimilar():
    data = gen_angular_data(4, n=20000, seed=0)
    models = [train(TrainConfig(width=64, steps=10000, seed=seed), data) for seed in range(10)]
    retained = [model for model in models if model.retained(0.9)]
    found = find_permuted_pairs(retained, evaluation_grid(4, 2000, data.sigma, 1))
    dissimilar = [
        pair for pair in found
        if min(pair.accuracy_a, pair.accuracy_b) > 0.9 and pair.m_cca < 0.9 and (pair.d_llv or 0.0) > 0.5
    ]
    assert dissimilar
