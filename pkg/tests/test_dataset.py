import numpy as np
import pytest

from volume_al.classifier import error_rate
from volume_al.dataset import (
    Dataset,
    LabelOracle,
    Shape,
    gen_synthetic,
    load_csv,
    save_csv,
    scale_min_max,
)
from volume_al.errors import (
    BudgetExceeded,
    ConfigError,
    IoError,
    MalformedInput,
    ShapeError,
)
from volume_al.represent import assign

from .common import write_lines

# pylint: disable=R0201, no-self-use


class TestDataset:
    def test_attrs(self):
        dataset = Dataset([[0.0, 1.0], [2.0, 3.0]], [1, 0], name="tiny")
        assert dataset.n == len(dataset) == 2
        assert dataset.m == 2
        assert dataset.num_classes == 2
        assert dataset.name == "tiny"
        assert "n=2" in repr(dataset)

    def test_read_only(self):
        dataset = Dataset([[0.0], [1.0]], [0, 1])
        with pytest.raises(ValueError):
            dataset.features[0, 0] = 5.0
        with pytest.raises(ValueError):
            dataset.labels[0] = 1

    @pytest.mark.parametrize(
        ("features", "labels", "error"),
        [
            pytest.param([[0.0], [1.0]], [0], ShapeError, id="label_count"),
            pytest.param([0.0, 1.0], [0, 1], ShapeError, id="not_a_matrix"),
            pytest.param([[np.nan], [1.0]], [0, 1], MalformedInput, id="nan"),
            pytest.param([[0.0], [1.0]], [0.5, 1.0], MalformedInput, id="float"),
            pytest.param([[0.0], [1.0]], [-1, 0], MalformedInput, id="negative"),
        ],
    )
    def test_invalid(self, features, labels, error):
        with pytest.raises(error):
            Dataset(features, labels)

    def test__eq__(self):
        first = Dataset([[0.0], [1.0]], [0, 1])
        assert first == Dataset([[0.0], [1.0]], [0, 1], name="other")
        assert first != Dataset([[0.0], [1.0]], [1, 0])
        assert first != "dataset"


class TestLabelOracle:
    def test_query_charges_once(self):
        oracle = LabelOracle(Dataset([[0.0], [1.0], [2.0]], [0, 1, 1]), budget=2)
        assert oracle.query(1) == 1
        assert oracle.query(1) == 1
        assert oracle.queries_used == 1
        assert oracle.query(0) == 0
        assert oracle.queried == [1, 0]
        with pytest.raises(BudgetExceeded):
            oracle.query(2)

    def test_grant_is_free(self):
        oracle = LabelOracle(Dataset([[0.0], [1.0], [2.0]], [0, 1, 1]), budget=0)
        assert list(oracle.grant([0, 2])) == [0, 1]
        assert oracle.queries_used == 0
        assert oracle.is_known(2)
        assert not oracle.is_known(1)

    def test_out_of_range(self):
        oracle = LabelOracle(Dataset([[0.0]], [0]))
        with pytest.raises(ShapeError):
            oracle.query(1)

    def test_negative_budget(self):
        with pytest.raises(ConfigError):
            LabelOracle(Dataset([[0.0]], [0]), budget=-1)


class TestLoadCsv:
    def test_first_appearance_encoding(self, tmp_path):
        path = write_lines(tmp_path / "tiny.csv", ["0,0,a", "1,0,a", "5,5,b"])
        dataset = load_csv(path, 3)
        assert (dataset.n, dataset.m) == (3, 2)
        assert list(dataset.labels) == [0, 0, 1]
        assert dataset.features.tolist() == [[0, 0], [1, 0], [5, 5]]

    def test_labels_by_appearance_not_value(self, tmp_path):
        path = write_lines(tmp_path / "tiny.csv", ["0,9", "1,3", "2,9"])
        assert list(load_csv(path).labels) == [0, 1, 0]

    @pytest.mark.parametrize(
        "label_column",
        [
            pytest.param(1, id="index"),
            pytest.param("1", id="digit_string"),
            pytest.param("kind", id="name"),
        ],
    )
    def test_label_column(self, tmp_path, label_column):
        path = write_lines(
            tmp_path / "named.csv", ["kind,x,y", "cat,1,2", "dog,3,4", "cat,5,6"]
        )
        dataset = load_csv(path, label_column)
        assert list(dataset.labels) == [0, 1, 0]
        assert dataset.features.tolist() == [[1, 2], [3, 4], [5, 6]]

    def test_non_numeric_feature(self, tmp_path):
        path = write_lines(tmp_path / "bad.csv", ["0,0,a", "1,x,a", "5,5,b"])
        with pytest.raises(MalformedInput) as exc_info:
            load_csv(path)
        assert exc_info.value.row == 2
        assert "row 2" in str(exc_info.value)

    def test_not_utf8(self, tmp_path):
        path = tmp_path / "latin.csv"
        path.write_bytes(b"0,0,a\n1,\xff\xfe,b\n")
        with pytest.raises(MalformedInput) as exc_info:
            load_csv(path)
        assert exc_info.value.row == 2

    def test_ragged_row(self, tmp_path):
        path = write_lines(tmp_path / "ragged.csv", ["0,0,a", "1,a"])
        with pytest.raises(MalformedInput):
            load_csv(path)

    @pytest.mark.parametrize(
        "label_column",
        [pytest.param(4, id="index"), pytest.param("missing", id="name")],
    )
    def test_missing_label_column(self, tmp_path, label_column):
        path = write_lines(tmp_path / "named.csv", ["x,y,kind", "1,2,a"])
        with pytest.raises(ConfigError):
            load_csv(path, label_column)

    def test_missing_file(self, tmp_path):
        with pytest.raises(IoError):
            load_csv(tmp_path / "absent.csv")

    def test_round_trip(self, tmp_path):
        dataset = gen_synthetic(Shape.SPIRALS, 3, 7, 2.5, 0.3, 11)
        save_csv(dataset, tmp_path / "spirals.csv")
        reloaded = load_csv(tmp_path / "spirals.csv")
        assert np.array_equal(reloaded.features, dataset.features)
        assert np.array_equal(reloaded.labels, dataset.labels)


class TestGenSynthetic:
    def test_deterministic(self):
        first = gen_synthetic(Shape.BLOBS, 2, 5, 10.0, 1.0, 7)
        second = gen_synthetic(Shape.BLOBS, 2, 5, 10.0, 1.0, 7)
        assert first.features.tobytes() == second.features.tobytes()
        assert first == second

    @pytest.mark.parametrize("shape", list(Shape))
    def test_balanced(self, shape):
        dataset = gen_synthetic(shape, 3, 4, 10.0, 1.0, 0)
        assert dataset.n == 12
        assert dataset.m == 2
        assert list(np.bincount(dataset.labels)) == [4, 4, 4]

    def test_far_blobs_are_separable(self):
        dataset = gen_synthetic(Shape.BLOBS, 3, 30, 100.0, 1.0, 3)
        means = np.array(
            [dataset.features[dataset.labels == c].mean(axis=0) for c in range(3)]
        )
        assert error_rate(assign(dataset.features, means), dataset.labels) == 0.0

    @pytest.mark.parametrize(
        ("classes", "per_class", "separation", "noise_std"),
        [
            pytest.param(1, 5, 10.0, 1.0, id="one_class"),
            pytest.param(2, 0, 10.0, 1.0, id="empty_class"),
            pytest.param(2, 5, 0.0, 1.0, id="no_separation"),
            pytest.param(2, 5, 10.0, -1.0, id="negative_noise"),
        ],
    )
    def test_invalid(self, classes, per_class, separation, noise_std):
        with pytest.raises(ConfigError):
            gen_synthetic(Shape.BLOBS, classes, per_class, separation, noise_std, 0)


class TestScaleMinMax:
    def test_unit_range(self):
        features = [[0.0, 5.0, 1.0], [2.0, 7.0, 1.0], [4.0, 6.0, 1.0]]
        dataset = Dataset(features, [0, 1, 0])
        scaled = scale_min_max(dataset)
        assert scaled.features.tolist() == [[0, 0, 0], [0.5, 1, 0], [1, 0.5, 0]]
        assert np.array_equal(scaled.labels, dataset.labels)
