"""
Tests for pivot scoring and selection.
"""
import numpy as np
import pytest

from src.core.exceptions import NoFeasiblePivotError, PivotError
from src.models.tables import ModelTable
from src.services.metrics import (
    d_llv,
    diversity_matrix,
    score_group_label_pivots,
    score_label_pivots,
    select_group_pivots,
    select_pivots,
)
from src.services.model_core import apply_equivalence, build_projections, cond_log_probs

from .conftest import random_model, random_weights


@pytest.fixture
def pq():
    return cond_log_probs(random_model(seed=0)), cond_log_probs(random_model(seed=1))


def test_all_ordered_label_pairs_scored():
    p = cond_log_probs(random_model(n=10, k=3, seed=0))
    q = cond_log_probs(random_model(n=10, k=3, seed=1))
    scores = score_label_pivots(p, q)
    assert len(scores) == 6
    assert {(s.y0_index, s.excluded_label) for s in scores} == {(a, b) for a in range(3) for b in range(3) if a != b}


def test_selection_takes_best_label_pair(pq):
    p, q = pq
    pivots = select_pivots(p, q, dim=2, n_input_sets=50)
    best = min((s for s in score_label_pivots(p, q) if s.feasible), key=lambda s: (s.t1, s.y0_index, s.excluded_label))
    assert (pivots.y0_index, pivots.excluded_label) == (best.y0_index, best.excluded_label)
    assert d_llv(p, q, pivots).t1 == pytest.approx(best.t1)


def test_selection_structure(pq):
    p, q = pq
    pivots = select_pivots(p, q, dim=2, n_input_sets=20)
    assert len(pivots.x_llv) == 2
    assert pivots.x0_index not in pivots.x_llv
    assert len(pivots.y_llv) == p.k - 1
    assert pivots.y0_index in pivots.y_llv


def test_selection_is_deterministic(pq):
    p, q = pq
    assert select_pivots(p, q, dim=2, n_input_sets=30, seed=4) == select_pivots(p, q, dim=2, n_input_sets=30, seed=4)


def test_more_candidates_never_worsen_t2(pq):
    p, q = pq
    few = select_pivots(p, q, dim=2, n_input_sets=5, seed=0)
    many = select_pivots(p, q, dim=2, n_input_sets=100, seed=0)
    # The first five candidate draws are shared between both searches.
    assert d_llv(p, q, many).t2 <= d_llv(p, q, few).t2 + 1e-12


def test_equivalent_models_select_zero_distance():
    model = random_model(seed=3)
    other = apply_equivalence(model, np.array([[1.0, 2.0], [-1.0, 0.5]]))
    p, q = cond_log_probs(model), cond_log_probs(other)
    assert d_llv(p, q, select_pivots(p, q, dim=2, n_input_sets=20)).value < 1e-8


def test_diversity_required_with_too_few_labels():
    p = cond_log_probs(random_model(n=10, k=3, seed=0))
    with pytest.raises(NoFeasiblePivotError):
        select_pivots(p, p, dim=2)
    pivots = select_pivots(p, cond_log_probs(random_model(n=10, k=3, seed=1)), dim=2, require_diversity=False)
    assert pivots.psi_labels == [y for y in pivots.y_llv if y != pivots.y0_index]


def test_too_few_inputs():
    p = cond_log_probs(random_model(n=3, k=4, seed=0))
    with pytest.raises(PivotError):
        select_pivots(p, p, dim=3)


def test_no_feasible_pivots_for_flat_model():
    flat = cond_log_probs(ModelTable(np.zeros((6, 2)), np.random.default_rng(0).normal(size=(5, 2))))
    with pytest.raises(NoFeasiblePivotError):
        select_pivots(flat, flat, dim=2, n_input_sets=10)


def test_diversity_matrix_is_N_transpose_L(pivots):
    model = random_model(seed=7)
    projections = build_projections(model, pivots)
    Q = diversity_matrix(cond_log_probs(model), pivots, 2)
    assert np.allclose(Q, projections.N.T @ projections.L, atol=1e-10)


def test_zero_weight_inputs_never_become_pivots():
    weights = random_weights(40, seed=2)
    weights[::2] = 0.0
    weights /= weights.sum()
    p = cond_log_probs(random_model(seed=0), weights)
    q = cond_log_probs(random_model(seed=1), weights)
    for seed in range(10):
        pivots = select_pivots(p, q, dim=2, n_input_sets=20, seed=seed)
        assert all(i % 2 == 1 for i in [pivots.x0_index, *pivots.x_llv])
        assert d_llv(p, q, pivots).value > 0


def test_too_few_weighted_inputs():
    weights = np.zeros(10)
    weights[:2] = 0.5
    p = cond_log_probs(random_model(n=10, seed=0), weights)
    q = cond_log_probs(random_model(n=10, seed=1), weights)
    with pytest.raises(PivotError):
        select_pivots(p, q, dim=2)


class TestGroupSelection:
    @pytest.fixture
    def group(self):
        return [cond_log_probs(random_model(seed=seed)) for seed in range(3)]

    def test_two_models_match_pair_selection(self, pq):
        p, q = pq
        assert select_group_pivots([p, q], dim=2, n_input_sets=30) == select_pivots(p, q, dim=2, n_input_sets=30)

    def test_scores_average_every_pair(self, group):
        grouped = {(s.y0_index, s.excluded_label): s for s in score_group_label_pivots(group)}
        pairwise = [
            {(s.y0_index, s.excluded_label): s.t1 for s in score_label_pivots(group[a], group[b])}
            for a, b in [(0, 1), (0, 2), (1, 2)]
        ]
        for key, score in grouped.items():
            if score.feasible:
                assert score.t1 == pytest.approx(np.mean([values[key] for values in pairwise]))

    def test_pivots_serve_every_pair(self, group):
        pivots = select_group_pivots(group, dim=2, n_input_sets=50)
        best = min((s for s in score_group_label_pivots(group) if s.feasible), key=lambda s: (s.t1, s.y0_index, s.excluded_label))
        assert (pivots.y0_index, pivots.excluded_label) == (best.y0_index, best.excluded_label)
        for a, b in [(0, 1), (0, 2), (1, 2)]:
            assert d_llv(group[a], group[b], pivots).violations == []

    def test_needs_two_models(self, group):
        with pytest.raises(PivotError):
            select_group_pivots(group[:1], dim=2)
