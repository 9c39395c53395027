import json

import numpy as np
import pytest

from wknn.core import Dataset, WeightVector
from wknn.errors import DimensionMismatchError
from wknn.knn import KnnModel
from wknn.metrics import (
    ConfusionMatrix,
    empirical_confusion,
    macro_f1_from_scores,
    matrix_deviation,
    precision_recall_f1,
)

UNIFORM3 = WeightVector(np.ones(3))


def one_hot(labels, num_classes):
    return np.eye(num_classes)[np.asarray(labels) - 1]


class TestEmpiricalConfusion:
    def test_perfect_predictor(self):
        labels = [1, 2, 3, 2, 1]
        ds = Dataset(np.zeros((5, 1)), labels, 3)
        cm = empirical_confusion(one_hot(labels, 3), UNIFORM3, ds)
        assert np.all(cm.per_class[:, 1] == 0)  # fn
        assert np.all(cm.per_class[:, 2] == 0)  # fp

    def test_constant_predictor(self):
        # always predicts class 1 on labels (1, 2, 2, 3)
        ds = Dataset(np.zeros((4, 1)), [1, 2, 2, 3], 3)
        eta = np.tile([1.0, 0.0, 0.0], (4, 1))
        cm = empirical_confusion(eta, UNIFORM3, ds)
        np.testing.assert_array_equal(cm.per_class[0], [0.0, 0.0, 3 / 4, 1 / 4])

    def test_binary_tilted(self):
        ds = Dataset(np.zeros((3, 1)), [1, 1, 2], 2)
        eta = np.tile([0.6, 0.4], (3, 1))
        cm = empirical_confusion(eta, WeightVector(np.ones(2)), ds)
        # class 1 always wins: for class 2 the two class-1 points are true
        # negatives and the class-2 point is a false negative
        np.testing.assert_allclose(cm.per_class[1], [2 / 3, 1 / 3, 0.0, 0.0])

    def test_ties_count_positive_for_all_tied_classes(self):
        ds = Dataset(np.zeros((2, 1)), [1, 2], 2)
        eta = np.tile([0.5, 0.5], (2, 1))
        cm = empirical_confusion(eta, WeightVector(np.ones(2)), ds)
        # both classes positive everywhere: fp = share of other-class points
        np.testing.assert_allclose(cm.per_class[:, 2], [0.5, 0.5])
        np.testing.assert_allclose(cm.per_class[:, 1], [0.0, 0.0])

    def test_model_source(self):
        rng = np.random.default_rng(3)
        ds = Dataset(rng.random((30, 2)), rng.integers(1, 4, 30), 3)
        model = KnnModel(ds, 5)
        cm = empirical_confusion(model, UNIFORM3, ds)
        assert cm.kind == "empirical"
        assert cm.counts.sum(axis=1).tolist() == [30, 30, 30]

    def test_row_sums_exact(self):
        rng = np.random.default_rng(4)
        for n in (3, 7, 30):
            ds = Dataset(rng.random((n, 1)), rng.integers(1, 4, n), 3)
            cm = empirical_confusion(KnnModel(ds, min(5, n)), UNIFORM3, ds)
            assert np.array_equal(cm.counts.sum(axis=1), np.full(3, n))

    def test_class_count_identity(self):
        rng = np.random.default_rng(5)
        ds = Dataset(rng.random((40, 1)), rng.integers(1, 4, 40), 3)
        cm = empirical_confusion(KnnModel(ds, 7), UNIFORM3, ds)
        per_class_counts = np.bincount(ds.labels, minlength=4)[1:]
        assert np.array_equal(cm.counts[:, 1] + cm.counts[:, 3], per_class_counts)

    def test_scale_invariance_exact(self):
        rng = np.random.default_rng(6)
        ds = Dataset(rng.random((25, 2)), rng.integers(1, 4, 25), 3)
        model = KnnModel(ds, 5)
        q = WeightVector(np.array([0.5, 0.3, 0.2]))
        a = empirical_confusion(model, q, ds)
        b = empirical_confusion(model, WeightVector(7.0 * q.q), ds)
        np.testing.assert_array_equal(a.per_class, b.per_class)

    def test_shape_mismatch(self):
        ds = Dataset(np.zeros((3, 1)), [1, 2, 1], 2)
        with pytest.raises(DimensionMismatchError):
            empirical_confusion(np.zeros((2, 2)), WeightVector(np.ones(2)), ds)


class TestPrecisionRecallF1:
    def test_perfect(self):
        cm = ConfusionMatrix(np.array([[0.5, 0, 0, 0.5], [0.5, 0, 0, 0.5]]), "empirical")
        report = precision_recall_f1(cm)
        assert report.macro_f1 == 1.0
        np.testing.assert_array_equal(report.precision, [1, 1])

    def test_zero_denominator_convention(self):
        cm = ConfusionMatrix(np.array([[0.5, 0.5, 0, 0], [0.5, 0.5, 0, 0]]), "empirical")
        report = precision_recall_f1(cm)
        np.testing.assert_array_equal(report.precision, [0, 0])
        np.testing.assert_array_equal(report.f1, [0, 0])
        assert report.macro_f1 == 0.0

    def test_constant_predictor_values(self):
        cm = ConfusionMatrix(np.array([[0.0, 0.0, 3 / 4, 1 / 4],
                                       [0.5, 0.25, 0.0, 0.25]]), "empirical")
        report = precision_recall_f1(cm)
        assert report.precision[0] == pytest.approx(1 / 4)
        assert report.recall[0] == 1.0
        assert report.f1[0] == pytest.approx(2 / 5)

    def test_macro_is_mean(self):
        rng = np.random.default_rng(8)
        raw = rng.random((4, 4))
        cm = ConfusionMatrix(raw / raw.sum(axis=1, keepdims=True), "population")
        report = precision_recall_f1(cm)
        assert report.macro_f1 == pytest.approx(report.f1.mean())
        for arr in (report.precision, report.recall, report.f1):
            assert np.all((arr >= 0) & (arr <= 1))


class TestMacroF1FastPath:
    def test_matches_confusion_route(self):
        rng = np.random.default_rng(9)
        for _ in range(50):
            n = int(rng.integers(5, 40))
            labels = rng.integers(1, 4, n)
            eta = rng.dirichlet(np.ones(3), size=n)
            q = rng.random(3) + 1e-3
            ds = Dataset(np.zeros((n, 1)), labels, 3)
            cm = empirical_confusion(eta, WeightVector(q), ds)
            assert macro_f1_from_scores(eta, labels, 3, q) == \
                precision_recall_f1(cm).macro_f1


class TestMatrixDeviation:
    def make(self, rows):
        return ConfusionMatrix(np.asarray(rows, dtype=float), "population")

    def test_zero_on_equal(self):
        cm = self.make([[0.25, 0.25, 0.25, 0.25]])
        np.testing.assert_array_equal(matrix_deviation(cm, cm), np.zeros((1, 4)))

    def test_symmetry_and_value(self):
        a = self.make([[0.5, 0.2, 0.2, 0.1]])
        b = self.make([[0.3, 0.4, 0.2, 0.1]])
        dev = matrix_deviation(a, b)
        np.testing.assert_allclose(dev, matrix_deviation(b, a))
        assert dev[0, 0] == pytest.approx(0.2)

    def test_mismatch(self):
        a = self.make([[0.25, 0.25, 0.25, 0.25]])
        b = self.make([[0.25, 0.25, 0.25, 0.25]] * 2)
        with pytest.raises(DimensionMismatchError):
            matrix_deviation(a, b)


class TestSerialization:
    def test_confusion_round_trip(self):
        cm = ConfusionMatrix(np.array([[0.1, 0.2, 0.3, 0.4]]), "empirical")
        data = json.loads(cm.to_json())
        assert data["per_class"][0] == {"tn": 0.1, "fn": 0.2, "fp": 0.3, "tp": 0.4}
        back = ConfusionMatrix.from_dict(data)
        np.testing.assert_array_equal(back.per_class, cm.per_class)

    def test_report_fields(self):
        cm = ConfusionMatrix(np.array([[0.5, 0, 0, 0.5]]), "empirical")
        data = json.loads(precision_recall_f1(cm).to_json())
        assert set(data) == {"precision", "recall", "f1", "macro_f1"}


class TestConfusionMatrixValidation:
    def test_bad_row_sum(self):
        with pytest.raises(ValueError):
            ConfusionMatrix(np.array([[0.5, 0.5, 0.5, 0.5]]), "empirical")

    def test_bad_kind(self):
        with pytest.raises(ValueError):
            ConfusionMatrix(np.array([[0.25, 0.25, 0.25, 0.25]]), "guess")
