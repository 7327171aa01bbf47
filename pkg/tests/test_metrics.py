"""Tests for alignment, rank, curve, trajectory, and adaptation metrics."""

import numpy as np
import pytest

from prealign import (
    ConfigError,
    MetaConfig,
    Dataset,
    ShapeError,
    accuracy_auc,
    alignment_angles,
    effective_rank,
    generalization_gap,
    gram_effective_dim,
    init_mlp,
    meta_loss,
    synthetic_blobs,
    weight_feedback_distance,
    weight_trajectory_pca,
)
from prealign.metrics import _episode_split

from oracles import (
    entropy_effective_rank_reference,
    gram_cosine_reference,
    jacobi_singular_values,
)


class TestAlignmentAngles:
    def test_transposed_feedback_gives_zero(self):
        mlp = init_mlp((6, 5, 3), seed=0)
        mlp.feedback = [w.T.copy() for w in mlp.weights]
        for layer in range(mlp.n_layers):
            rep = alignment_angles(mlp, layer)
            np.testing.assert_allclose(rep.per_neuron_deg, 0.0, atol=1e-6)

    def test_negated_transpose_gives_180(self):
        mlp = init_mlp((6, 5, 3), seed=0)
        mlp.feedback = [-w.T.copy() for w in mlp.weights]
        rep = alignment_angles(mlp, 0)
        np.testing.assert_allclose(rep.per_neuron_deg, 180.0, atol=1e-6)

    def test_hand_computed_angles(self):
        mlp = init_mlp((2, 2), seed=0)
        mlp.weights[0] = np.array([[1.0, 0.0], [0.0, 1.0]])
        # unit 0: W[:, 0] = (1, 0) vs B[0, :] = (1, 1) -> 45 degrees
        # unit 1: W[:, 1] = (0, 1) vs B[1, :] = (1, 0) -> 90 degrees
        mlp.feedback[0] = np.array([[1.0, 1.0], [1.0, 0.0]])
        rep = alignment_angles(mlp, 0)
        np.testing.assert_allclose(rep.per_neuron_deg, [45.0, 90.0], atol=1e-10)
        np.testing.assert_allclose(rep.mean_deg, 67.5, atol=1e-10)
        assert rep.layer_index == 0

    def test_fresh_init_is_near_orthogonal(self):
        mlp = init_mlp((50, 40, 10), seed=1)
        rep = alignment_angles(mlp, 0)
        assert 85.0 < rep.mean_deg < 95.0

    def test_zero_norm_gives_neutral_90(self):
        mlp = init_mlp((4, 3, 2), seed=0)
        mlp.weights[0][:, 1] = 0.0
        rep = alignment_angles(mlp, 0)
        assert rep.per_neuron_deg[1] == 90.0
        mlp2 = init_mlp((4, 3, 2), seed=0)
        mlp2.feedback[0][2, :] = 0.0
        assert alignment_angles(mlp2, 0).per_neuron_deg[2] == 90.0

    def test_feedback_scale_invariant(self):
        mlp = init_mlp((6, 5, 3), seed=2)
        base = alignment_angles(mlp, 0).per_neuron_deg
        mlp.feedback[0] = mlp.feedback[0] * 3.0
        np.testing.assert_allclose(
            alignment_angles(mlp, 0).per_neuron_deg, base, atol=1e-10
        )

    def test_bad_layer(self):
        mlp = init_mlp((4, 3, 2), seed=0)
        with pytest.raises(ConfigError):
            alignment_angles(mlp, 2)
        with pytest.raises(ConfigError):
            alignment_angles(mlp, -1)


class TestWeightFeedbackDistance:
    def test_zero_when_transposed(self):
        mlp = init_mlp((5, 4, 3), seed=0)
        mlp.feedback = [w.T.copy() for w in mlp.weights]
        assert weight_feedback_distance(mlp, 0) == 0.0
        assert weight_feedback_distance(mlp, 1) == 0.0

    def test_known_value(self):
        mlp = init_mlp((2, 2), seed=0)
        mlp.weights[0] = np.array([[1.0, 2.0], [3.0, 4.0]])
        mlp.feedback[0] = np.zeros((2, 2))
        np.testing.assert_allclose(
            weight_feedback_distance(mlp, 0), np.sqrt(30.0)
        )

    def test_bad_layer(self):
        with pytest.raises(ConfigError):
            weight_feedback_distance(init_mlp((3, 2), seed=0), 5)


class TestEffectiveRank:
    def test_identity(self):
        for n in (2, 5, 9):
            np.testing.assert_allclose(effective_rank(np.eye(n)), n, rtol=1e-10)

    def test_rank_one(self):
        m = np.outer(np.arange(1.0, 5.0), np.arange(1.0, 4.0))
        np.testing.assert_allclose(effective_rank(m), 1.0, rtol=1e-8)

    def test_two_equal_directions(self):
        np.testing.assert_allclose(
            effective_rank(np.diag([1.0, 1.0, 0.0])), 2.0, rtol=1e-10
        )

    def test_scale_invariant(self, rng):
        m = rng.normal(size=(6, 8))
        np.testing.assert_allclose(
            effective_rank(3.0 * m), effective_rank(m), rtol=1e-10
        )

    def test_bounds(self, rng):
        m = rng.normal(size=(20, 30))
        er = effective_rank(m)
        assert 1.0 <= er <= 20.0

    def test_matches_entropy_reference(self, rng):
        # fully independent route: Jacobi spectrum + looped entropy
        for shape in ((5, 5), (4, 9), (10, 3)):
            m = rng.normal(size=shape)
            np.testing.assert_allclose(
                effective_rank(m),
                entropy_effective_rank_reference(jacobi_singular_values(m)),
                rtol=1e-8,
            )

    def test_all_zero_raises_value_error(self):
        with pytest.raises(ValueError):
            effective_rank(np.zeros((3, 3)))


class TestGramEffectiveDim:
    def test_identical_neurons_give_one(self, rng):
        col = rng.normal(size=(30, 1))
        h = np.tile(col, (1, 6))
        np.testing.assert_allclose(gram_effective_dim(h), 1.0, rtol=1e-8)

    def test_orthogonal_neurons_give_count(self):
        np.testing.assert_allclose(gram_effective_dim(np.eye(7)), 7.0, rtol=1e-10)

    def test_matches_brute_force_pipeline(self, rng):
        h = rng.normal(size=(50, 8))
        gram = gram_cosine_reference(h)
        np.testing.assert_allclose(
            gram_effective_dim(h), effective_rank(gram), rtol=1e-8
        )

    def test_column_rescale_invariant(self, rng):
        h = rng.normal(size=(40, 6))
        scales = rng.uniform(0.1, 10.0, size=6)
        np.testing.assert_allclose(
            gram_effective_dim(h * scales), gram_effective_dim(h), rtol=1e-8
        )

    def test_dead_neuron_counts_as_independent(self):
        # a zero column is orthogonal to everything and keeps a unit diagonal
        h = np.array([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0]])
        np.testing.assert_allclose(gram_effective_dim(h), 3.0, rtol=1e-10)

    def test_shape_validation(self, rng):
        with pytest.raises(ConfigError):
            gram_effective_dim(rng.normal(size=10))
        with pytest.raises(ConfigError):
            gram_effective_dim(rng.normal(size=(10, 1)))
        with pytest.raises(ConfigError):
            gram_effective_dim(rng.normal(size=(1, 10)))


class TestAccuracyAuc:
    def test_hand_computed(self):
        np.testing.assert_allclose(accuracy_auc([0.0, 1.0, 1.0]), 0.75)

    def test_linear_ramp(self):
        np.testing.assert_allclose(accuracy_auc(np.linspace(0, 1, 11)), 0.5)

    def test_constant_curve_returns_itself(self):
        np.testing.assert_allclose(accuracy_auc([0.7] * 5), 0.7)

    def test_single_point(self):
        assert accuracy_auc([0.3]) == 0.3

    def test_dominating_curve_scores_higher(self, rng):
        low = rng.uniform(0.0, 0.5, size=20)
        assert accuracy_auc(low + 0.4) > accuracy_auc(low)

    def test_validation(self):
        with pytest.raises(ConfigError):
            accuracy_auc([])
        with pytest.raises(ConfigError):
            accuracy_auc(np.ones((3, 2)))


class TestGeneralizationGap:
    def test_basic(self):
        np.testing.assert_allclose(generalization_gap(0.5, 0.7), 0.2)

    def test_can_be_negative(self):
        assert generalization_gap(1.0, 0.4) == pytest.approx(-0.6)


class TestWeightTrajectoryPca:
    def _planar_points(self, rng, count):
        # orthonormal 2-D basis embedded in 12 dimensions
        basis, _ = np.linalg.qr(rng.normal(size=(12, 2)))
        coeffs = rng.normal(size=(count, 2))
        return coeffs @ basis.T, coeffs

    def test_planar_trajectory_preserves_distances(self, rng):
        snaps, _ = self._planar_points(rng, 5)
        fb = snaps[-1] * 0.5 + 0.1 * snaps[0]
        coords, fb_coord = weight_trajectory_pca(list(snaps), fb)
        assert coords.shape == (5, 2)
        assert fb_coord.shape == (2,)
        for i in range(5):
            for j in range(5):
                np.testing.assert_allclose(
                    np.linalg.norm(coords[i] - coords[j]),
                    np.linalg.norm(snaps[i] - snaps[j]),
                    atol=1e-8,
                )
            np.testing.assert_allclose(
                np.linalg.norm(coords[i] - fb_coord),
                np.linalg.norm(snaps[i] - fb),
                atol=1e-8,
            )

    def test_contraction_toward_target_survives_projection(self, rng):
        basis, _ = np.linalg.qr(rng.normal(size=(10, 2)))
        target = np.array([2.0, -1.0])
        steps = [target * (1 - 0.5**k) + np.array([3.0, 1.0]) * 0.5**k
                 for k in range(5)]
        snaps = [basis @ s for s in steps]
        fb = basis @ target
        coords, fb_coord = weight_trajectory_pca(snaps, fb)
        dists = [np.linalg.norm(c - fb_coord) for c in coords]
        assert all(a > b for a, b in zip(dists, dists[1:]))

    def test_matrix_snapshots_accepted(self, rng):
        snaps = [rng.normal(size=(4, 3)) for _ in range(4)]
        coords, fb_coord = weight_trajectory_pca(snaps, rng.normal(size=(4, 3)))
        assert coords.shape == (4, 2)

    def test_too_few_snapshots(self, rng):
        with pytest.raises(ShapeError):
            weight_trajectory_pca([rng.normal(size=6)] * 2, rng.normal(size=6))

    def test_length_mismatch(self, rng):
        snaps = [rng.normal(size=6) for _ in range(3)]
        with pytest.raises(ShapeError):
            weight_trajectory_pca(snaps, rng.normal(size=7))


class TestEpisodeSplit:
    def test_disjoint_and_balanced(self):
        task = synthetic_blobs(300, 5, 3, seed=0)
        rng = np.random.default_rng(42)
        support, query = _episode_split(task, 10, 10, rng)
        assert support.size == 30 and query.size == 30
        assert not set(support) & set(query)
        for c in range(3):
            assert (task.labels[support] == c).sum() == 10
            assert (task.labels[query] == c).sum() == 10

    def test_insufficient_class_raises(self):
        labels = np.array([0] * 5 + [1] * 30 + [2] * 30)
        images = np.random.default_rng(42).uniform(0, 1, size=(65, 5))
        task = Dataset(images=images, labels=labels, class_count=3, name="t")
        with pytest.raises(ConfigError):
            _episode_split(task, 10, 10, np.random.default_rng(0))


class TestMetaLoss:
    def _task(self, seed=0):
        return synthetic_blobs(400, 8, 3, seed=seed)

    def test_network_untouched(self):
        mlp = init_mlp((8, 6, 3), seed=0)
        before = ([w.copy() for w in mlp.weights],
                  [b.copy() for b in mlp.biases],
                  [f.copy() for f in mlp.feedback])
        meta_loss(mlp, MetaConfig(tasks=[self._task()], inner_steps=3))
        for group, saved in zip((mlp.weights, mlp.biases, mlp.feedback), before):
            for arr, old in zip(group, saved):
                np.testing.assert_array_equal(arr, old)

    def test_total_is_sum_of_tasks(self):
        mlp = init_mlp((8, 6, 3), seed=0)
        cfg = MetaConfig(tasks=[self._task(0), self._task(1)], inner_steps=2)
        total, per_task = meta_loss(mlp, cfg)
        assert len(per_task) == 2
        np.testing.assert_allclose(total, sum(per_task))

    def test_deterministic(self):
        mlp = init_mlp((8, 6, 3), seed=0)
        cfg = MetaConfig(tasks=[self._task()], inner_steps=3, seed=9)
        assert meta_loss(mlp, cfg) == meta_loss(mlp, cfg)

    def test_adaptation_lowers_query_loss(self):
        # same seed -> identical episode split; only the inner loop differs
        mlp = init_mlp((8, 6, 3), seed=1)
        frozen = MetaConfig(tasks=[self._task()], inner_steps=1, inner_lr=1e-9,
                            seed=4)
        adapted = MetaConfig(tasks=[self._task()], inner_steps=40,
                             inner_lr=0.05, seed=4)
        assert meta_loss(mlp, adapted)[0] < meta_loss(mlp, frozen)[0]

    def test_shape_mismatch_rejected(self):
        mlp = init_mlp((8, 6, 3), seed=0)
        with pytest.raises(ConfigError):
            meta_loss(mlp, MetaConfig(tasks=[synthetic_blobs(100, 9, 3, seed=0)]))
        with pytest.raises(ConfigError):
            meta_loss(mlp, MetaConfig(tasks=[synthetic_blobs(100, 8, 4, seed=0)]))

    def test_config_validation(self):
        task = self._task()
        with pytest.raises(ConfigError):
            MetaConfig(tasks=[])
        with pytest.raises(ConfigError):
            MetaConfig(tasks=[task], shots_per_class=0)
        with pytest.raises(ConfigError):
            MetaConfig(tasks=[task], inner_steps=0)
        with pytest.raises(ConfigError):
            MetaConfig(tasks=[task], inner_lr=0.0)
