import dataclasses

import numpy as np
import pytest

from volume_al.classifier import (
    decision_values,
    error_rate,
    knn_predict,
    predict,
    train_rlsc,
)
from volume_al.errors import ConfigError, ShapeError
from volume_al.kernel import KernelKind, KernelSpec, kernel_matrix

from .common import three_blobs

# pylint: disable=R0201, no-self-use

LINEAR = KernelSpec(KernelKind.LINEAR)


class TestTrainRlsc:
    def test_single_point(self):
        model = train_rlsc([[1.0, 2.0]], [2], KernelSpec(gamma=0.5), num_classes=3)
        labels, _ = predict(model, np.random.default_rng(0).normal(size=(5, 2)))
        assert list(labels) == [2] * 5

    def test_two_point_closed_form(self):
        model = train_rlsc([[-1.0], [1.0]], [0, 1], LINEAR, lam=1e-6)
        f = decision_values(model, [[0.0], [2.0]])
        assert abs(f[0, 1]) <= 1e-4
        assert f[1, 1] > 0
        labels, _ = predict(model, [[-1.0], [1.0]])
        assert list(labels) == [0, 1]

    def test_deterministic(self):
        dataset = three_blobs(per_class=5)
        spec = KernelSpec(gamma=0.05)
        first = train_rlsc(dataset.features, dataset.labels, spec)
        second = train_rlsc(dataset.features, dataset.labels, spec)
        assert first.dual_weights.tobytes() == second.dual_weights.tobytes()

    @pytest.mark.parametrize("lam", [0.0, -1.0])
    def test_lambda_must_be_positive(self, lam):
        with pytest.raises(ConfigError):
            train_rlsc([[0.0]], [0], LINEAR, lam=lam)

    def test_label_count_mismatch(self):
        with pytest.raises(ShapeError):
            train_rlsc([[0.0], [1.0]], [0], LINEAR)

    @pytest.mark.parametrize("seed", range(20))
    def test_residual(self, seed):
        rng = np.random.default_rng(seed)
        n = int(rng.integers(2, 40))
        X = rng.normal(size=(n, 3))
        y = rng.integers(0, 3, size=n)
        spec = KernelSpec(gamma=float(rng.uniform(0.1, 2.0)))
        lam = float(10 ** rng.uniform(-4, 0))
        model = train_rlsc(X, y, spec, lam, num_classes=3)
        targets = -np.ones((n, 3))
        targets[np.arange(n), y] = 1.0
        system = kernel_matrix(X, spec).entries + lam * np.eye(n)
        residual = np.abs(system @ model.dual_weights - targets).max()
        assert residual <= 1e-8 * (1 + np.abs(targets).max())

    def test_decision_values_shrink_with_lambda(self):
        dataset = three_blobs(3, per_class=8)
        spec = KernelSpec(gamma=0.05)
        norms = []
        for lam in [1e-3, 1e-2, 1e-1, 1.0, 10.0, 100.0, 1000.0]:
            model = train_rlsc(dataset.features, dataset.labels, spec, lam)
            f = decision_values(model, dataset.features)
            norms.append(np.linalg.norm(f, axis=0))
        for smaller, larger in zip(norms[1:], norms):
            assert np.all(smaller < larger)
        assert np.all(norms[-1] < 0.1 * norms[0])


class TestPredict:
    def test_zero_decision_value_has_zero_margin(self):
        model = train_rlsc([[-1.0], [1.0]], [0, 1], LINEAR)
        _, margins = predict(model, [[0.0]])
        assert margins[0] == pytest.approx(0.0, abs=1e-12)

    def test_margins_ignore_support_order(self):
        dataset = three_blobs(per_class=6)
        spec = KernelSpec(gamma=0.05)
        order = np.random.default_rng(3).permutation(dataset.n)
        model = train_rlsc(dataset.features, dataset.labels, spec)
        shuffled = train_rlsc(dataset.features[order], dataset.labels[order], spec)
        queries = np.random.default_rng(4).normal(scale=8.0, size=(20, 2))
        labels, margins = predict(model, queries)
        shuffled_labels, shuffled_margins = predict(shuffled, queries)
        assert np.array_equal(labels, shuffled_labels)
        assert np.allclose(margins, shuffled_margins, atol=1e-8)

    def test_multiclass_margin_is_top_gap(self):
        dataset = three_blobs(per_class=4)
        model = train_rlsc(dataset.features, dataset.labels, KernelSpec(gamma=0.05))
        f = decision_values(model, dataset.features)
        _, margins = predict(model, dataset.features)
        top = np.sort(f, axis=1)
        assert np.allclose(margins, top[:, -1] - top[:, -2])

    @pytest.mark.parametrize("scale", [1e-6, 0.5, 3.0, 1e6])
    def test_labels_invariant_to_positive_scaling(self, scale):
        dataset = three_blobs(4, per_class=6)
        model = train_rlsc(dataset.features, dataset.labels, KernelSpec(gamma=0.05))
        scaled = dataclasses.replace(model, dual_weights=scale * model.dual_weights)
        X = np.random.default_rng(4).uniform(-10, 20, size=(40, 2))
        labels, margins = predict(model, X)
        scaled_labels, scaled_margins = predict(scaled, X)
        assert np.array_equal(labels, scaled_labels)
        assert np.allclose(scaled_margins, scale * margins, rtol=1e-9, atol=0.0)

    def test_dimension_mismatch(self):
        model = train_rlsc([[0.0, 1.0]], [0], LINEAR)
        with pytest.raises(ShapeError):
            predict(model, [[0.0]])


class TestKnnPredict:
    def test_nearest(self):
        assert list(knn_predict([[0.0], [2.0]], [0, 1], [[0.1]])) == [0]

    def test_tie_lowest_class(self):
        assert list(knn_predict([[2.0], [0.0]], [1, 0], [[1.0]])) == [0]

    def test_global_majority(self):
        X_l = [[0.0], [1.0], [2.0], [3.0], [4.0]]
        y_l = [1, 0, 1, 0, 1]
        assert list(knn_predict(X_l, y_l, [[-10.0], [10.0]], k=5)) == [1, 1]

    def test_k_too_large(self):
        with pytest.raises(ConfigError):
            knn_predict([[0.0]], [0], [[1.0]], k=2)


class TestErrorRate:
    @pytest.mark.parametrize(
        ("predicted", "truth", "expected"),
        [
            pytest.param([0, 1, 2], [0, 1, 2], 0.0, id="identical"),
            pytest.param([1, 1, 0], [0, 0, 1], 1.0, id="disjoint"),
            pytest.param([0, 1, 1, 0], [0, 1, 1, 1], 0.25, id="one_of_four"),
        ],
    )
    def test_values(self, predicted, truth, expected):
        assert error_rate(predicted, truth) == expected

    def test_length_mismatch(self):
        with pytest.raises(ShapeError):
            error_rate([0, 1], [0])
